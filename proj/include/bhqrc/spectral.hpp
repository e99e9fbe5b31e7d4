#pragma once

#include <cstddef>
#include <span>

#include "bhqrc/common.hpp"

namespace bhqrc {

/// Eigen-decomposition of a real symmetric operator: ascending energies and
/// orthonormal eigenvectors as columns.
struct SpectralDecomposition {
    RealVector energies;
    RealMatrix vectors;

    Eigen::Index dimension() const noexcept { return energies.size(); }
};

/// Throws NumericalError when `h` is not symmetric to 1e-12 relative tolerance.
SpectralDecomposition eigendecompose(const RealMatrix& h);

struct GapRatioStatistics {
    double mean = 0.0;
    std::size_t levels = 0;          // levels inside the window
    std::size_t ratios = 0;          // r_n values averaged
    std::size_t degenerate = 0;      // ratios forced to 0 by an exact degeneracy
};

/// Mean of r_n = min(s_n/s_{n-1}, s_{n-1}/s_n) over the central `inner_fraction`
/// of the sorted levels. floor(n (1 - f) / 2) levels are trimmed from each end.
/// Spacings below 1e-12 of the bandwidth count as degenerate and give r_n = 0.
GapRatioStatistics mean_gap_ratio(std::span<const double> energies, double inner_fraction);

inline constexpr double kGoeMeanGapRatio = 0.5359;
inline constexpr double kPoissonMeanGapRatio = 0.3863;

/// Normalized Shannon entropy -(ln N)^{-1} Σ |ψ_α|² ln |ψ_α|².
double information_dimension(const ComplexVector& amplitudes, std::size_t dimension);
double information_dimension(const RealVector& amplitudes, std::size_t dimension);

/// Average information dimension of the `count` eigenvectors whose rescaled
/// energy (E - E_min)/(E_max - E_min) lies closest to `epsilon`.
///
/// When `to_fock` is non-null the eigenvectors are first mapped by it (e.g.
/// from a parity sector back to the occupation basis), and the normalization
/// uses the row count of `to_fock`.
double mean_information_dimension(const SpectralDecomposition& decomposition, double epsilon,
                                  std::size_t count, const RealMatrix* to_fock = nullptr);

/// GOE finite-size reference (H_{N/2} - 2 + ln 4) / ln N, with the harmonic
/// number continued to non-integer arguments through the digamma function.
double goe_reference_information_dimension(double dimension);

} // namespace bhqrc
