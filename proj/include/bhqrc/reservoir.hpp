#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bhqrc/common.hpp"
#include "bhqrc/fock.hpp"
#include "bhqrc/lattice.hpp"

namespace bhqrc {

// Density matrix over the product-cutoff space of N sites with `site_dim`
// levels each; site 0 (the injection site) is the most significant digit.
class ReservoirState {
public:
    ReservoirState(ComplexMatrix rho, int site_dim);

    /// |0...0><0...0|
    static ReservoirState vacuum(int sites, int site_dim);
    /// |psi_1><psi_1| ⊗ rest
    static ReservoirState product(const RealVector& first_site, const ComplexMatrix& rest);

    const ComplexMatrix& rho() const noexcept { return rho_; }
    int site_dim() const noexcept { return site_dim_; }
    Eigen::Index dimension() const noexcept { return rho_.rows(); }

    /// Checks trace, Hermiticity and positivity. Eigenvalues in [-1e-9, 0) are
    /// clipped to zero; anything more negative throws NumericalError.
    void enforce_physical(double trace_tol = 1e-10, double hermitian_tol = 1e-10,
                          double negativity_tol = 1e-9);

private:
    ComplexMatrix rho_;
    int site_dim_;
};

/// sqrt(s)|0> + sqrt(1-s)|1> in a site space of dimension cutoff + 1.
RealVector encode_input(double s, int cutoff);

/// Tr_1 over the most significant site of dimension `site_dim`.
ComplexMatrix partial_trace_first_site(const ComplexMatrix& rho, int site_dim);

// exp(-i H dt / V), computed once from an eigendecomposition of H.
class Propagator {
public:
    Propagator(const RealMatrix& hamiltonian, double dt, int virtual_nodes);

    const ComplexMatrix& step() const noexcept { return step_; }
    /// exp(-i H t) for arbitrary t from the cached eigendecomposition.
    ComplexMatrix evolution(double t) const;
    double dt() const noexcept { return dt_; }
    int virtual_nodes() const noexcept { return virtual_nodes_; }
    Eigen::Index dimension() const noexcept { return step_.rows(); }

private:
    RealVector energies_;
    RealMatrix vectors_;
    ComplexMatrix step_;
    double dt_;
    int virtual_nodes_;
};

struct InjectionResult {
    ReservoirState state;
    std::vector<ReservoirState> nodes; // V states at t = v dt / V, v = 1..V
};

/// One erase-and-write step: reset site 0 to the encoded input, keep the
/// reduced state of the other sites, evolve for dt sampling V virtual nodes.
InjectionResult inject_and_evolve(const ReservoirState& previous, double s,
                                  const Propagator& propagator);

enum class ObservableFamily { Hopping, DensityDensity };

// <b†_i b_j + h.c.> or <n_i n_j>; i and j are user site labels (0-based).
struct Observable {
    ObservableFamily family;
    int i;
    int j;

    std::string name() const; // "hop_1_2", "nn_3_3" (1-based labels)
};

using ObservableSet = std::vector<Observable>;

/// Both families over all pairs i <= j, hopping family first: N(N+1) entries.
ObservableSet default_observables(int sites);

/// Nonzero matrix elements <target|O|state> for one basis state. `position_of`
/// maps user labels to basis positions (identity when empty).
std::vector<std::pair<Occupation, double>> apply_observable(const Observable& o,
                                                            const Occupation& state,
                                                            int max_occupation,
                                                            std::span<const int> position_of = {});

RealMatrix observable_matrix(const Observable& o, const FockBasis& basis,
                             std::span<const int> position_of = {});
std::vector<RealMatrix> observable_matrices(const ObservableSet& set, const FockBasis& basis,
                                            std::span<const int> position_of = {});

/// Tr[O_i rho_v] ordered virtual-node-major, then by operator.
RealVector measure_features(std::span<const ReservoirState> states,
                            std::span<const RealMatrix> operators);

// L x (V M + 1) design matrix with a trailing bias column of ones.
struct FeatureMatrix {
    RealMatrix values;
    std::size_t wash_out = 0;        // leading rows excluded downstream
    int virtual_nodes = 0;
    std::vector<std::string> columns; // feature names, "bias" last

    Eigen::Index rows() const noexcept { return values.rows(); }
    Eigen::Index cols() const noexcept { return values.cols(); }
    std::size_t observables() const;
};

std::vector<std::string> feature_column_names(const ObservableSet& observables, int virtual_nodes);

// Everything needed to build one reservoir: lattice, couplings and dynamics.
struct ReservoirSpec {
    int sites = 5;
    int cutoff = 3;
    TopologyKind topology = TopologyKind::OpenChain;
    CouplingSet couplings;           // aligned with Topology(topology, sites).edges()
    double dt = 1.0;
    int virtual_nodes = 10;
    int injection_site = 0;          // 0-based
    int positivity_check_interval = 100; // steps between eigenvalue checks, 0 = never
};

// Compiled erase-and-write map.
//
// The full density matrix is never formed. Only the reduced state sigma of
// the non-injected sites is carried between steps, since the injection
// discards site 0. Both the unitary and the default observables conserve the
// total boson number, so every operator is split into number-sector blocks,
// and the features of all virtual nodes are obtained as linear functionals of
// sigma that are precomputed once per reservoir.
class Reservoir {
public:
    explicit Reservoir(const ReservoirSpec& spec);
    ~Reservoir();
    Reservoir(Reservoir&&) noexcept;
    Reservoir& operator=(Reservoir&&) noexcept;

    const ReservoirSpec& spec() const noexcept;
    const ObservableSet& observables() const noexcept;
    const FockBasis& basis() const noexcept;
    const std::vector<int>& position_of() const noexcept;
    const RealMatrix& hamiltonian() const noexcept; // in basis (injection-site-first) order

    /// Feature rows for every input. `initial` is a full density matrix in the
    /// basis order; the vacuum is used when absent.
    FeatureMatrix run(std::span<const double> inputs, std::size_t wash_out,
                      const ReservoirState* initial = nullptr) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

FeatureMatrix run_sequence(std::span<const double> inputs, const ReservoirSpec& spec,
                           std::size_t wash_out);

/// Adds N(0, 1/sqrt(N_m)) to every non-bias entry. An empty `measurements`
/// means the ideal limit and returns the features unchanged.
FeatureMatrix apply_measurement_noise(const FeatureMatrix& features,
                                      std::optional<double> measurements, std::uint64_t seed);

} // namespace bhqrc
