#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bhqrc/config.hpp"
#include "bhqrc/learning.hpp"
#include "bhqrc/reservoir.hpp"
#include "bhqrc/spectral.hpp"

namespace bhqrc {

inline constexpr std::string_view kVersion = "0.1.0";

// One parameter point of a sweep; Δt is chosen per point from the grid.
struct PointSpec {
    double j_over_u = 0.1;
    TopologyKind topology = TopologyKind::OpenChain;
    double disorder = 0.0;
    std::optional<double> measurements; // empty = ideal
    int cutoff = 3;
};

/// Stable textual key, e.g. "open-chain|j=0.1|d=0|nm=ideal|nc=3".
std::string point_id(const PointSpec& point);

/// Cartesian product of the lattice and noise grids, in a fixed order.
std::vector<PointSpec> sweep_points(const ExperimentConfig& config);

/// Distinct coupling draws (1 unless disordered).
int reservoir_draws(const ExperimentConfig& config, const PointSpec& point);
/// Realizations averaged at a point: disorder draws and/or noise draws.
int realization_count(const ExperimentConfig& config, const PointSpec& point);

ReservoirSpec make_reservoir_spec(const ExperimentConfig& config, const PointSpec& point, double dt,
                                  int draw);

/// Input sequence covering the whole split. Depends only on the master seed,
/// the task's input law and the length, so it is shared across J/U, Δt,
/// topology, cutoff and noise.
std::vector<double> task_inputs(const ExperimentConfig& config, const PointSpec& point);

/// Targets for every delay or order of the task, aligned with the inputs.
std::vector<TargetSeries> task_targets(const TaskConfig& task, std::span<const double> inputs);

struct CurvePoint {
    int index = 0;              // delay or order
    double test = 0.0;          // mean over realizations
    double test_stderr = 0.0;   // NaN when a single realization
    double train = 0.0;
    int realizations = 0;
    int degenerate = 0;         // realizations with a zero-variance series
    double weight_norm = 0.0;   // mean |w|
};

// Capacity curve at one Δt.
struct Curve {
    double dt = 0.0;
    std::vector<CurvePoint> points;
};

/// Scores every task index on ideal features, one matrix per coupling draw.
/// Noise, when requested, is applied per realization with its own seed.
Curve evaluate_curve(const ExperimentConfig& config, const PointSpec& point, double dt,
                     std::span<const FeatureMatrix> draws, std::span<const TargetSeries> targets);

struct DelaySummary {
    int value = -1;
    bool below_at_first = false; // even the first index misses the threshold
};

/// Largest index before the first capacity below threshold. -1 with the flag
/// set when the first index already fails.
DelaySummary max_delay_above(std::span<const CurvePoint> curve, double threshold);

struct Selection {
    std::vector<CurvePoint> curve;
    std::vector<double> dt;     // Δt used for each index
    std::optional<double> best_dt; // set for the max-delay objective
    DelaySummary summary;
};

/// Picks Δt from the evaluated grid according to the objective; ties go to the
/// smallest Δt.
Selection optimize_dt(std::span<const Curve> curves, DtObjective objective, double threshold);

struct PointResult {
    PointSpec point;
    std::vector<Curve> curves; // every Δt of the grid
    Selection selection;
    std::string failure;       // empty on success
    std::size_t observables = 0;
};

/// Features are produced by `features` when given (for caching), otherwise by
/// running the reservoir.
using FeatureSource = std::function<FeatureMatrix(const ReservoirSpec&, std::span<const double>,
                                                  std::size_t wash_out)>;

PointResult run_point(const ExperimentConfig& config, const PointSpec& point,
                      const FeatureSource& features = {});

// ---- spectral diagnostics ------------------------------------------------

struct SpectralRecord {
    double j_over_un = 0.0;
    double j_over_u = 0.0;
    int sites = 0;
    int total = 0;
    std::string parity;
    std::size_t sector_dimension = 0;
    std::size_t fock_dimension = 0;
    GapRatioStatistics gap_ratio;
    double information_dimension = 0.0;
    double goe_information_dimension = 0.0;
};

/// Reflection-parity sector of the fixed-number Bose-Hubbard chain.
RealMatrix parity_sector_basis(const FockBasis& sector, const std::string& parity);
std::size_t parity_sector_dimension(int sites, int total, const std::string& parity);

SpectralRecord spectral_point(const SpectralConfig& config, double j_over_un);

// ---- feature redundancy --------------------------------------------------

struct SvdRecord {
    TopologyKind topology = TopologyKind::OpenChain;
    double j_over_u = 0.0;
    double dt = 0.0;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    SingularValueSpectrum spectrum;
};

/// Singular values of the training block of the ideal design matrix.
SvdRecord svd_point(const ExperimentConfig& config, const PointSpec& point, double dt,
                    const FeatureSource& features = {});

// ---- truncation check ----------------------------------------------------

struct CutoffComparison {
    double dt = 0.0;
    std::vector<int> cutoffs;
    std::vector<std::vector<CurvePoint>> curves; // one per cutoff
    double max_abs_difference = 0.0;             // over indices and cutoff pairs
};

CutoffComparison cutoff_check(const ExperimentConfig& config, const PointSpec& point, double dt,
                              const FeatureSource& features = {});

} // namespace bhqrc
