#include "bhqrc/tasks.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "bhqrc/common.hpp"

namespace bhqrc {

std::string_view to_string(TaskKind kind) {
    switch (kind) {
    case TaskKind::ShortTermMemory: return "stm";
    case TaskKind::ParityCheck: return "parity-check";
    case TaskKind::Narma: return "narma";
    }
    return "unknown";
}

TaskKind parse_task(std::string_view name) {
    if (name == "stm") return TaskKind::ShortTermMemory;
    if (name == "parity-check" || name == "pc") return TaskKind::ParityCheck;
    if (name == "narma") return TaskKind::Narma;
    throw ConfigError("unknown task '" + std::string(name) + "'");
}

std::string_view to_string(InputDistribution distribution) {
    switch (distribution) {
    case InputDistribution::Uniform01: return "uniform01";
    case InputDistribution::Binary01: return "binary01";
    case InputDistribution::UniformTo02: return "uniform-0-0.2";
    }
    return "unknown";
}

InputDistribution input_distribution(TaskKind kind) {
    switch (kind) {
    case TaskKind::ShortTermMemory: return InputDistribution::Uniform01;
    case TaskKind::ParityCheck: return InputDistribution::Binary01;
    case TaskKind::Narma: return InputDistribution::UniformTo02;
    }
    return InputDistribution::Uniform01;
}

std::vector<double> generate_inputs(InputDistribution distribution, std::size_t length,
                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> out(length);
    switch (distribution) {
    case InputDistribution::Uniform01: {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (auto& x : out) x = u(rng);
        break;
    }
    case InputDistribution::Binary01: {
        std::bernoulli_distribution b(0.5);
        for (auto& x : out) x = b(rng) ? 1.0 : 0.0;
        break;
    }
    case InputDistribution::UniformTo02: {
        std::uniform_real_distribution<double> u(0.0, 0.2);
        for (auto& x : out) x = u(rng);
        break;
    }
    }
    return out;
}

std::vector<double> generate_inputs(const TaskSpec& spec, std::size_t length) {
    return generate_inputs(input_distribution(spec.kind), length, spec.seed);
}

namespace {

void check_delay(std::span<const double> inputs, int delay) {
    if (delay < 0) throw std::invalid_argument("delay must be non-negative");
    if (static_cast<std::size_t>(delay) >= inputs.size()) {
        throw std::invalid_argument("delay " + std::to_string(delay) +
                                    " must be shorter than the sequence");
    }
}

} // namespace

TargetSeries stm_targets(std::span<const double> inputs, int delay, int degree) {
    check_delay(inputs, delay);
    if (degree < 1) throw std::invalid_argument("degree must be >= 1");
    const auto tau = static_cast<std::size_t>(delay);
    TargetSeries t{std::vector<double>(inputs.size(), 0.0), tau};
    for (std::size_t k = tau; k < inputs.size(); ++k) {
        t.values[k] = degree == 1 ? inputs[k - tau] : std::pow(inputs[k - tau], degree);
    }
    return t;
}

TargetSeries parity_check_targets(std::span<const double> inputs, int delay) {
    check_delay(inputs, delay);
    for (double s : inputs) {
        if (s != 0.0 && s != 1.0) throw std::invalid_argument("parity check needs binary inputs");
    }
    const auto tau = static_cast<std::size_t>(delay);
    TargetSeries t{std::vector<double>(inputs.size(), 0.0), tau};
    for (std::size_t k = tau; k < inputs.size(); ++k) {
        int ones = 0;
        for (std::size_t j = 0; j <= tau; ++j) ones += inputs[k - j] != 0.0;
        t.values[k] = ones % 2;
    }
    return t;
}

TargetSeries narma_targets(std::span<const double> inputs, int order) {
    if (order < 2) throw std::invalid_argument("NARMA order must be >= 2");
    for (double s : inputs) {
        if (!(s >= 0.0 && s <= 0.2 + 1e-12)) {
            throw std::invalid_argument("NARMA inputs must lie in [0, 0.2]");
        }
    }
    const auto n = static_cast<std::ptrdiff_t>(order);
    const auto len = static_cast<std::ptrdiff_t>(inputs.size());
    TargetSeries t{std::vector<double>(inputs.size(), 0.0), 0};
    // Zero history for non-positive times.
    auto y = [&](std::ptrdiff_t k) { return k >= 0 ? t.values[static_cast<std::size_t>(k)] : 0.0; };
    auto s = [&](std::ptrdiff_t k) { return k >= 0 ? inputs[static_cast<std::size_t>(k)] : 0.0; };
    for (std::ptrdiff_t k = 0; k < len; ++k) {
        double next;
        if (order == 2) {
            next = 0.4 * y(k - 1) + 0.4 * y(k - 1) * y(k - 2) + 0.6 * std::pow(s(k - 1), 3) + 0.1;
        } else {
            double history = 0.0;
            for (std::ptrdiff_t j = 1; j <= n; ++j) history += y(k - j);
            next = 0.3 * y(k - 1) + 0.05 * y(k - 1) * history + 1.5 * s(k - n) * s(k - 1) + 0.1;
        }
        if (!(std::abs(next) <= 10.0)) {
            throw NumericalError("NARMA(" + std::to_string(order) + ") diverged at step " +
                                 std::to_string(k));
        }
        t.values[static_cast<std::size_t>(k)] = next;
    }
    return t;
}

TargetSeries make_targets(const TaskSpec& spec, std::span<const double> inputs) {
    switch (spec.kind) {
    case TaskKind::ShortTermMemory: return stm_targets(inputs, spec.delay, spec.degree);
    case TaskKind::ParityCheck: return parity_check_targets(inputs, spec.delay);
    case TaskKind::Narma: return narma_targets(inputs, spec.order);
    }
    throw std::logic_error("unhandled task kind");
}

} // namespace bhqrc
