#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace bhqrc {

enum class TaskKind { ShortTermMemory, ParityCheck, Narma };
enum class InputDistribution { Uniform01, Binary01, UniformTo02 };

std::string_view to_string(TaskKind kind);
TaskKind parse_task(std::string_view name);
std::string_view to_string(InputDistribution distribution);

/// Input law each benchmark is defined with.
InputDistribution input_distribution(TaskKind kind);

struct TaskSpec {
    TaskKind kind = TaskKind::ShortTermMemory;
    int delay = 0;  // stm, parity-check
    int degree = 1; // stm
    int order = 2;  // narma
    std::uint64_t seed = 0;
};

/// i.i.d. draws, deterministic in `seed`.
std::vector<double> generate_inputs(InputDistribution distribution, std::size_t length,
                                    std::uint64_t seed);
std::vector<double> generate_inputs(const TaskSpec& spec, std::size_t length);

// Target sequence aligned with the inputs; entries before `first_valid` are
// undefined and must be excluded from training and testing.
struct TargetSeries {
    std::vector<double> values;
    std::size_t first_valid = 0;
};

/// y_k = s_{k-τ}^d
TargetSeries stm_targets(std::span<const double> inputs, int delay, int degree);

/// y_k = (s_k + s_{k-1} + ... + s_{k-τ}) mod 2
TargetSeries parity_check_targets(std::span<const double> inputs, int delay);

/// NARMA(n) recurrence with zero history before the first input. Order 2 uses
/// the dedicated second-order form. Throws NumericalError if |y| exceeds 10.
TargetSeries narma_targets(std::span<const double> inputs, int order);

TargetSeries make_targets(const TaskSpec& spec, std::span<const double> inputs);

} // namespace bhqrc
