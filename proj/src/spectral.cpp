#include "bhqrc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/digamma.hpp>

namespace bhqrc {

SpectralDecomposition eigendecompose(const RealMatrix& h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("eigendecompose needs a square matrix");
    const double scale = std::max(h.cwiseAbs().maxCoeff(), 1e-300);
    if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw NumericalError("eigendecompose: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(h);
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

GapRatioStatistics mean_gap_ratio(std::span<const double> energies, double inner_fraction) {
    if (!(inner_fraction > 0.0 && inner_fraction <= 1.0)) {
        throw std::invalid_argument("inner fraction must lie in (0, 1]");
    }
    std::vector<double> levels(energies.begin(), energies.end());
    std::sort(levels.begin(), levels.end());
    const auto trim = static_cast<std::size_t>(
        std::floor(static_cast<double>(levels.size()) * (1.0 - inner_fraction) / 2.0 + 1e-12));
    if (levels.size() < 2 * trim + 3) {
        throw std::invalid_argument("gap ratio needs at least 3 levels inside the window");
    }
    const auto first = levels.begin() + static_cast<std::ptrdiff_t>(trim);
    const auto last = levels.end() - static_cast<std::ptrdiff_t>(trim);
    const double bandwidth = levels.back() - levels.front();
    const double tiny = 1e-12 * bandwidth;

    GapRatioStatistics stats;
    stats.levels = static_cast<std::size_t>(last - first);
    double sum = 0.0;
    for (auto it = first + 2; it != last; ++it) {
        const double s_prev = *(it - 1) - *(it - 2);
        const double s_next = *it - *(it - 1);
        ++stats.ratios;
        if (s_prev <= tiny || s_next <= tiny) {
            ++stats.degenerate;
            continue;
        }
        sum += std::min(s_next / s_prev, s_prev / s_next);
    }
    stats.mean = sum / static_cast<double>(stats.ratios);
    return stats;
}

namespace {

double entropy_ratio(const RealVector& probabilities, std::size_t dimension) {
    if (dimension < 2) throw std::invalid_argument("information dimension needs N >= 2");
    const double norm = probabilities.sum();
    if (std::abs(norm - 1.0) > 1e-10) {
        throw NumericalError("information dimension: vector is not normalized");
    }
    double entropy = 0.0;
    for (double p : probabilities) {
        if (p > 0.0) entropy -= p * std::log(p);
    }
    return entropy / std::log(static_cast<double>(dimension));
}

} // namespace

double information_dimension(const ComplexVector& amplitudes, std::size_t dimension) {
    return entropy_ratio(amplitudes.cwiseAbs2(), dimension);
}

double information_dimension(const RealVector& amplitudes, std::size_t dimension) {
    return entropy_ratio(amplitudes.cwiseAbs2(), dimension);
}

double mean_information_dimension(const SpectralDecomposition& decomposition, double epsilon,
                                  std::size_t count, const RealMatrix* to_fock) {
    const auto n = static_cast<std::size_t>(decomposition.dimension());
    if (count == 0 || count > n) {
        throw std::invalid_argument("eigenvector count must lie in [1, " + std::to_string(n) + "]");
    }
    if (to_fock && to_fock->cols() != decomposition.vectors.rows()) {
        throw std::invalid_argument("fock map does not match the eigenvector dimension");
    }
    const RealVector& e = decomposition.energies;
    const double e_min = e.minCoeff();
    const double span = e.maxCoeff() - e_min;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto distance = [&](std::size_t i) {
        const double rescaled = span > 0.0 ? (e(static_cast<Eigen::Index>(i)) - e_min) / span : 0.0;
        return std::abs(rescaled - epsilon);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return distance(a) < distance(b); });

    const std::size_t basis_dim = to_fock ? static_cast<std::size_t>(to_fock->rows()) : n;
    double sum = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const auto col = static_cast<Eigen::Index>(order[k]);
        if (to_fock) {
            sum += information_dimension(RealVector(*to_fock * decomposition.vectors.col(col)), basis_dim);
        } else {
            sum += information_dimension(RealVector(decomposition.vectors.col(col)), basis_dim);
        }
    }
    return sum / static_cast<double>(count);
}

double goe_reference_information_dimension(double dimension) {
    if (!(dimension >= 2.0)) throw std::invalid_argument("GOE reference needs N >= 2");
    const double x = dimension / 2.0;
    const double harmonic =
        boost::math::digamma(x + 1.0) + boost::math::constants::euler<double>();
    return (harmonic - 2.0 + std::log(4.0)) / std::log(dimension);
}

} // namespace bhqrc
