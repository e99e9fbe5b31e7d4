#include "bhqrc/learning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bhqrc {

ReadoutModel ridge_fit(const Eigen::Ref<const RealMatrix>& x, std::span<const double> targets,
                       double beta) {
    if (static_cast<std::size_t>(x.rows()) != targets.size()) {
        throw std::invalid_argument("ridge_fit: " + std::to_string(x.rows()) + " rows but " +
                                    std::to_string(targets.size()) + " targets");
    }
    if (!(beta >= 0.0)) throw std::invalid_argument("ridge_fit: beta must be non-negative");
    const Eigen::Map<const RealVector> y(targets.data(), static_cast<Eigen::Index>(targets.size()));

    RealMatrix normal = RealMatrix::Zero(x.cols(), x.cols());
    normal.selfadjointView<Eigen::Lower>().rankUpdate(x.transpose());
    normal.diagonal().array() += beta;
    const RealVector rhs = x.transpose() * y;

    ReadoutModel model;
    model.beta = beta;
    if (beta == 0.0) {
        Eigen::LDLT<RealMatrix> ldlt(normal);
        const RealVector d = ldlt.vectorD().cwiseAbs();
        if (ldlt.info() != Eigen::Success || d.size() == 0 ||
            d.minCoeff() <= 1e-12 * std::max(1.0, d.maxCoeff())) {
            throw NumericalError("ridge_fit: normal matrix is singular; use a positive beta");
        }
        model.weights = ldlt.solve(rhs);
        return model;
    }
    Eigen::LLT<RealMatrix> llt(normal);
    if (llt.info() == Eigen::Success) {
        model.weights = llt.solve(rhs);
    } else {
        // Positive definite in exact arithmetic; fall back on a pivoted factorization.
        model.weights = Eigen::LDLT<RealMatrix>(normal).solve(rhs);
    }
    return model;
}

RealVector predict(const ReadoutModel& model, const Eigen::Ref<const RealMatrix>& x) {
    if (x.cols() != model.weights.size()) {
        throw std::invalid_argument("predict: " + std::to_string(x.cols()) + " columns but " +
                                    std::to_string(model.weights.size()) + " weights");
    }
    return x * model.weights;
}

CapacityResult capacity(std::span<const double> predicted, std::span<const double> target) {
    if (predicted.size() != target.size()) throw std::invalid_argument("capacity: length mismatch");
    if (predicted.size() < 2) throw std::invalid_argument("capacity: need at least two samples");
    const auto n = static_cast<double>(predicted.size());
    double mp = 0.0;
    double mt = 0.0;
    for (std::size_t k = 0; k < predicted.size(); ++k) {
        mp += predicted[k];
        mt += target[k];
    }
    mp /= n;
    mt /= n;
    double cov = 0.0;
    double vp = 0.0;
    double vt = 0.0;
    for (std::size_t k = 0; k < predicted.size(); ++k) {
        const double dp = predicted[k] - mp;
        const double dt = target[k] - mt;
        cov += dp * dt;
        vp += dp * dp;
        vt += dt * dt;
    }
    // Relative floor so that round-off around a constant does not count as signal.
    const auto flat = [&](double var, double mean) {
        return var <= 1e-24 * n * std::max(1.0, mean * mean);
    };
    if (flat(vp, mp) || flat(vt, mt)) return {0.0, true};
    return {std::min(1.0, cov * cov / (vp * vt)), false};
}

CapacityResult capacity(const RealVector& predicted, const RealVector& target) {
    return capacity(std::span<const double>(predicted.data(), static_cast<std::size_t>(predicted.size())),
                    std::span<const double>(target.data(), static_cast<std::size_t>(target.size())));
}

std::size_t default_wash_out(double j_over_u) { return j_over_u < 0.1 ? 500 : 100; }

Evaluation evaluate_task(const FeatureMatrix& features, std::span<const double> targets,
                         const SplitProtocol& split, double beta) {
    if (split.train == 0 || split.test == 0) {
        throw std::invalid_argument("evaluate_task: train and test lengths must be positive");
    }
    if (split.wash_out < features.wash_out) {
        throw std::invalid_argument("evaluate_task: split wash-out is shorter than the feature wash-out");
    }
    if (static_cast<std::size_t>(features.rows()) < split.total()) {
        throw std::invalid_argument("evaluate_task: " + std::to_string(features.rows()) +
                                    " feature rows cannot cover the split");
    }
    if (targets.size() < split.total()) {
        throw std::invalid_argument("evaluate_task: target sequence is shorter than the split");
    }
    const auto rows = [&](std::size_t start, std::size_t count) {
        return features.values.middleRows(static_cast<Eigen::Index>(split.wash_out + start),
                                          static_cast<Eigen::Index>(count));
    };
    const auto train_y = targets.subspan(split.wash_out, split.train);
    const auto test_y = targets.subspan(split.wash_out + split.train, split.test);

    Evaluation e;
    e.model = ridge_fit(rows(0, split.train), train_y, beta);
    const RealVector train_pred = predict(e.model, rows(0, split.train));
    const RealVector test_pred = predict(e.model, rows(split.train, split.test));
    e.train = capacity(std::span<const double>(train_pred.data(), split.train), train_y);
    e.test = capacity(std::span<const double>(test_pred.data(), split.test), test_y);
    return e;
}

SingularValueSpectrum singular_value_spectrum(const Eigen::Ref<const RealMatrix>& x,
                                              double relative_threshold) {
    if (x.size() == 0) throw std::invalid_argument("singular_value_spectrum: empty matrix");
    Eigen::BDCSVD<RealMatrix> svd(x);
    SingularValueSpectrum s;
    s.values = svd.singularValues(); // Eigen returns them sorted descending
    s.threshold = relative_threshold;
    const double cut = relative_threshold * s.values(0);
    for (Eigen::Index i = 0; i < s.values.size(); ++i) s.redundant += s.values(i) < cut;
    return s;
}

} // namespace bhqrc
