#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bhqrc/lattice.hpp"
#include "bhqrc/learning.hpp"
#include "bhqrc/tasks.hpp"

namespace bhqrc {

enum class Regime { Mott, Chaotic, Superfluid };

std::string_view to_string(Regime regime);
Regime parse_regime(std::string_view name);
/// mott 1e-3, chaotic 0.1, superfluid 1e3.
double regime_j_over_u(Regime regime);

// How the evolution time is chosen from the grid.
//   MaxDelay: one Δt for the whole curve, maximizing the largest delay above
//             threshold, then the summed capacity, then preferring small Δt.
//   PerIndex: best Δt chosen separately for every delay or order.
enum class DtObjective { MaxDelay, PerIndex };

enum class OutputFormat { Csv, Json };

std::string_view to_string(DtObjective objective);
std::string_view to_string(OutputFormat format);
OutputFormat parse_format(std::string_view name);

struct LatticeConfig {
    int sites = 5;
    int cutoff = 3;
    std::vector<TopologyKind> topologies{TopologyKind::OpenChain};
    std::vector<double> j_over_u{0.1};
    std::vector<double> disorder{0.0};
    int realizations = 10; // disorder draws averaged when disorder > 0
};

struct DynamicsConfig {
    std::vector<double> dt{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    int virtual_nodes = 10;
    int injection_site = 0; // 0-based here, 1-based in the file
};

struct ProtocolConfig {
    std::optional<std::size_t> wash_out; // default depends on J/U
    std::size_t train = 1000;
    std::size_t test = 1000;

    SplitProtocol split(double j_over_u) const;
};

struct TaskConfig {
    TaskKind kind = TaskKind::ShortTermMemory;
    std::vector<int> delays;  // stm, parity-check; default 0..15
    int degree = 1;
    std::vector<int> orders;  // narma; default 2..14
    double threshold = 0.8;
    DtObjective objective = DtObjective::MaxDelay;

    /// Delays or NARMA orders, depending on the kind.
    const std::vector<int>& indices() const;
};

struct NoiseConfig {
    std::vector<std::optional<double>> measurements{std::nullopt}; // nullopt = ideal
    int realizations = 10;
};

struct SpectralConfig {
    int sites = 5;
    std::optional<int> total;     // boson number, default unit filling
    std::string parity = "odd";   // odd | even
    TopologyKind topology = TopologyKind::OpenChain;
    std::vector<double> j_over_un;
    double inner_fraction = 0.7;
    double epsilon = 0.5;
    std::size_t eigenvectors = 100;
};

struct OutputConfig {
    std::string dir = "results";
    std::string name = "experiment";
    OutputFormat format = OutputFormat::Csv;
    bool features = false; // also dump feature and target matrices
};

struct ExperimentConfig {
    LatticeConfig lattice;
    DynamicsConfig dynamics;
    ProtocolConfig protocol;
    TaskConfig task;
    double beta = kDefaultRidge;
    NoiseConfig noise;
    SpectralConfig spectral;
    std::vector<int> cutoffs{3, 4}; // cutoff-check
    OutputConfig output;
    std::uint64_t seed = 0;
};

/// Throws ConfigError on unknown keys, wrong types or out-of-range values.
ExperimentConfig parse_config(const nlohmann::json& document);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical, fully defaulted form; round-trips through parse_config.
nlohmann::json to_json(const ExperimentConfig& config);

/// FNV-1a of the canonical dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

} // namespace bhqrc
