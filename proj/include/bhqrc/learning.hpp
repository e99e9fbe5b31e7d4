#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bhqrc/common.hpp"
#include "bhqrc/reservoir.hpp"

namespace bhqrc {

inline constexpr double kDefaultRidge = 1e-2;

struct ReadoutModel {
    RealVector weights; // one per design column, bias included
    double beta = kDefaultRidge;
};

/// w = (XᵀX + βI)⁻¹ Xᵀ y. The bias column, if any, is penalized like the rest.
/// Throws NumericalError when β = 0 and XᵀX is singular.
ReadoutModel ridge_fit(const Eigen::Ref<const RealMatrix>& x, std::span<const double> targets,
                       double beta = kDefaultRidge);

RealVector predict(const ReadoutModel& model, const Eigen::Ref<const RealMatrix>& x);

struct CapacityResult {
    double value = 0.0;
    bool degenerate = false; // one series had zero variance, value forced to 0
};

/// Squared Pearson correlation.
CapacityResult capacity(std::span<const double> predicted, std::span<const double> target);
CapacityResult capacity(const RealVector& predicted, const RealVector& target);

// Contiguous wash-out -> train -> test segments measured in input steps.
struct SplitProtocol {
    std::size_t wash_out = 100;
    std::size_t train = 1000;
    std::size_t test = 1000;

    std::size_t total() const noexcept { return wash_out + train + test; }
};

/// Wash-out used by default: 500 steps below J/U = 0.1, 100 otherwise.
std::size_t default_wash_out(double j_over_u);

struct Evaluation {
    CapacityResult train;
    CapacityResult test;
    ReadoutModel model;
};

/// Fits on the training segment and scores both segments. Feature rows and
/// targets are both indexed by input step and must cover the whole split.
Evaluation evaluate_task(const FeatureMatrix& features, std::span<const double> targets,
                         const SplitProtocol& split, double beta = kDefaultRidge);

struct SingularValueSpectrum {
    RealVector values;        // descending
    std::size_t redundant = 0; // count below threshold * largest
    double threshold = 1e-10;
};

SingularValueSpectrum singular_value_spectrum(const Eigen::Ref<const RealMatrix>& x,
                                              double relative_threshold = 1e-10);

} // namespace bhqrc
