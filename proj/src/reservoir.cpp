#include "bhqrc/reservoir.hpp"

#include <cmath>
#include <random>

namespace bhqrc {

ReservoirState::ReservoirState(ComplexMatrix rho, int site_dim)
    : rho_(std::move(rho)), site_dim_(site_dim) {
    if (rho_.rows() != rho_.cols()) throw std::invalid_argument("density matrix must be square");
    if (site_dim_ < 1 || rho_.rows() % site_dim_ != 0) {
        throw std::invalid_argument("density matrix dimension is not a multiple of the site dimension");
    }
}

ReservoirState ReservoirState::vacuum(int sites, int site_dim) {
    Eigen::Index dim = 1;
    for (int j = 0; j < sites; ++j) dim *= site_dim;
    ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
    rho(0, 0) = 1.0;
    return ReservoirState(std::move(rho), site_dim);
}

ReservoirState ReservoirState::product(const RealVector& first_site, const ComplexMatrix& rest) {
    const auto c = first_site.size();
    const auto dr = rest.rows();
    ComplexMatrix rho(c * dr, c * dr);
    for (Eigen::Index a = 0; a < c; ++a)
        for (Eigen::Index b = 0; b < c; ++b)
            rho.block(a * dr, b * dr, dr, dr) = (first_site(a) * first_site(b)) * rest;
    return ReservoirState(std::move(rho), static_cast<int>(c));
}

void ReservoirState::enforce_physical(double trace_tol, double hermitian_tol,
                                      double negativity_tol) {
    const Complex trace = rho_.trace();
    if (std::abs(trace - Complex(1.0)) > trace_tol) {
        throw NumericalError("density matrix trace deviates from 1 by " +
                             std::to_string(std::abs(trace - Complex(1.0))));
    }
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > hermitian_tol) {
        throw NumericalError("density matrix is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(rho_);
    const double lowest = solver.eigenvalues().minCoeff();
    if (lowest < -negativity_tol) {
        throw NumericalError("density matrix has eigenvalue " + std::to_string(lowest));
    }
    if (lowest < 0.0) {
        const RealVector clipped = solver.eigenvalues().cwiseMax(0.0);
        rho_ = solver.eigenvectors() * clipped.asDiagonal() * solver.eigenvectors().adjoint();
    }
}

RealVector encode_input(double s, int cutoff) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("input must lie in [0, 1]");
    if (cutoff < 1) throw std::invalid_argument("input encoding needs a cutoff of at least 1");
    RealVector psi = RealVector::Zero(cutoff + 1);
    psi(0) = std::sqrt(s);
    psi(1) = std::sqrt(1.0 - s);
    return psi;
}

ComplexMatrix partial_trace_first_site(const ComplexMatrix& rho, int site_dim) {
    if (site_dim < 1 || rho.rows() % site_dim != 0) {
        throw std::invalid_argument("partial trace: dimension mismatch");
    }
    const Eigen::Index dr = rho.rows() / site_dim;
    ComplexMatrix reduced = ComplexMatrix::Zero(dr, dr);
    for (Eigen::Index a = 0; a < site_dim; ++a) reduced += rho.block(a * dr, a * dr, dr, dr);
    return reduced;
}

Propagator::Propagator(const RealMatrix& hamiltonian, double dt, int virtual_nodes)
    : dt_(dt), virtual_nodes_(virtual_nodes) {
    if (virtual_nodes < 1) throw std::invalid_argument("virtual node count must be >= 1");
    if (!(dt >= 0.0)) throw std::invalid_argument("evolution time must be non-negative");
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(hamiltonian);
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
    energies_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
    step_ = evolution(dt / virtual_nodes);
}

ComplexMatrix Propagator::evolution(double t) const {
    const ComplexVector phases =
        (energies_.cast<Complex>() * Complex(0.0, -t)).array().exp().matrix();
    return vectors_.cast<Complex>() * phases.asDiagonal() * vectors_.transpose().cast<Complex>();
}

InjectionResult inject_and_evolve(const ReservoirState& previous, double s,
                                  const Propagator& propagator) {
    if (propagator.dimension() != previous.dimension()) {
        throw std::invalid_argument("propagator was built for a different Hamiltonian dimension");
    }
    const int c = previous.site_dim();
    const ComplexMatrix rest = partial_trace_first_site(previous.rho(), c);
    ReservoirState current = ReservoirState::product(encode_input(s, c - 1), rest);

    const ComplexMatrix& u = propagator.step();
    std::vector<ReservoirState> nodes;
    nodes.reserve(static_cast<std::size_t>(propagator.virtual_nodes()));
    ComplexMatrix rho = current.rho();
    for (int v = 0; v < propagator.virtual_nodes(); ++v) {
        rho = u * rho * u.adjoint();
        nodes.emplace_back(rho, c);
    }
    return {nodes.back(), std::move(nodes)};
}

std::string Observable::name() const {
    const char* prefix = family == ObservableFamily::Hopping ? "hop_" : "nn_";
    return prefix + std::to_string(i + 1) + "_" + std::to_string(j + 1);
}

ObservableSet default_observables(int sites) {
    if (sites < 1) throw std::invalid_argument("observable set needs at least one site");
    ObservableSet set;
    for (auto family : {ObservableFamily::Hopping, ObservableFamily::DensityDensity})
        for (int i = 0; i < sites; ++i)
            for (int j = i; j < sites; ++j) set.push_back({family, i, j});
    return set;
}

std::vector<std::pair<Occupation, double>> apply_observable(const Observable& o,
                                                            const Occupation& state,
                                                            int max_occupation,
                                                            std::span<const int> position_of) {
    const auto sites = static_cast<int>(state.size());
    if (o.i < 0 || o.j < 0 || o.i >= sites || o.j >= sites) {
        throw std::out_of_range("observable " + o.name() + " refers to a missing site");
    }
    const auto pos = [&](int label) {
        return position_of.empty() ? label : position_of[static_cast<std::size_t>(label)];
    };
    const int a = pos(o.i);
    const int b = pos(o.j);
    std::vector<std::pair<Occupation, double>> out;
    if (o.family == ObservableFamily::DensityDensity) {
        const double value = static_cast<double>(state[a]) * state[b];
        if (value != 0.0) out.emplace_back(state, value);
        return out;
    }
    if (a == b) {
        if (state[a] != 0) out.emplace_back(state, 2.0 * state[a]);
        return out;
    }
    // b†_a b_b and its conjugate b†_b b_a
    for (const auto& [to, from] : {std::pair{a, b}, std::pair{b, a}}) {
        if (state[from] == 0 || state[to] + 1 > max_occupation) continue;
        Occupation target = state;
        const double amplitude = std::sqrt(static_cast<double>(target[from]) * (target[to] + 1));
        --target[from];
        ++target[to];
        out.emplace_back(std::move(target), amplitude);
    }
    return out;
}

RealMatrix observable_matrix(const Observable& o, const FockBasis& basis,
                             std::span<const int> position_of) {
    const auto dim = static_cast<Eigen::Index>(basis.size());
    RealMatrix m = RealMatrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        for (const auto& [target, amplitude] :
             apply_observable(o, basis.state(static_cast<std::size_t>(col)),
                              basis.max_occupation(), position_of)) {
            if (auto row = basis.index_of(target)) m(static_cast<Eigen::Index>(*row), col) += amplitude;
        }
    }
    return m;
}

std::vector<RealMatrix> observable_matrices(const ObservableSet& set, const FockBasis& basis,
                                            std::span<const int> position_of) {
    std::vector<RealMatrix> out;
    out.reserve(set.size());
    for (const auto& o : set) out.push_back(observable_matrix(o, basis, position_of));
    return out;
}

RealVector measure_features(std::span<const ReservoirState> states,
                            std::span<const RealMatrix> operators) {
    const auto m = static_cast<Eigen::Index>(operators.size());
    RealVector row(static_cast<Eigen::Index>(states.size()) * m);
    for (std::size_t v = 0; v < states.size(); ++v) {
        const ComplexMatrix& rho = states[v].rho();
        for (Eigen::Index i = 0; i < m; ++i) {
            const RealMatrix& o = operators[static_cast<std::size_t>(i)];
            if (o.rows() != rho.rows()) throw std::invalid_argument("observable dimension mismatch");
            // Tr[O rho] = Σ_ab O_ab rho_ba
            const Complex value = (o.cast<Complex>().cwiseProduct(rho.transpose())).sum();
            if (std::abs(value.imag()) > 1e-8) {
                throw NumericalError("expectation value of operator " + std::to_string(i) +
                                     " has imaginary part " + std::to_string(value.imag()));
            }
            row(static_cast<Eigen::Index>(v) * m + i) = value.real();
        }
    }
    return row;
}

std::size_t FeatureMatrix::observables() const {
    if (virtual_nodes <= 0) return 0;
    return static_cast<std::size_t>(values.cols() - 1) / static_cast<std::size_t>(virtual_nodes);
}

std::vector<std::string> feature_column_names(const ObservableSet& observables, int virtual_nodes) {
    std::vector<std::string> names;
    names.reserve(observables.size() * static_cast<std::size_t>(virtual_nodes) + 1);
    for (int v = 1; v <= virtual_nodes; ++v)
        for (const auto& o : observables) names.push_back(o.name() + "_v" + std::to_string(v));
    names.emplace_back("bias");
    return names;
}

FeatureMatrix run_sequence(std::span<const double> inputs, const ReservoirSpec& spec,
                           std::size_t wash_out) {
    return Reservoir(spec).run(inputs, wash_out);
}

FeatureMatrix apply_measurement_noise(const FeatureMatrix& features,
                                      std::optional<double> measurements, std::uint64_t seed) {
    if (!measurements) return features;
    if (!(*measurements >= 1.0)) throw std::invalid_argument("measurement count must be >= 1");
    FeatureMatrix noisy = features;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0 / std::sqrt(*measurements));
    const Eigen::Index feature_cols = noisy.values.cols() - 1;
    for (Eigen::Index r = 0; r < noisy.values.rows(); ++r)
        for (Eigen::Index c = 0; c < feature_cols; ++c) noisy.values(r, c) += noise(rng);
    return noisy;
}

} // namespace bhqrc
