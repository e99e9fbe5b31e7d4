#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bhqrc/common.hpp"
#include "bhqrc/fock.hpp"

namespace bhqrc {

enum class TopologyKind { OpenChain, PeriodicChain, AllToAll };

std::string_view to_string(TopologyKind kind);
TopologyKind parse_topology(std::string_view name);

struct Edge {
    int a;
    int b;
    friend bool operator==(const Edge&, const Edge&) = default;
};

// Coupling graph over sites 0..N-1. Edges are unordered pairs stored with a < b.
class Topology {
public:
    Topology(TopologyKind kind, int sites);

    TopologyKind kind() const noexcept { return kind_; }
    int sites() const noexcept { return sites_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    // Same graph with site labels permuted: site j becomes position_of[j].
    Topology relabeled(const std::vector<int>& position_of) const;

private:
    Topology(TopologyKind kind, int sites, std::vector<Edge> edges)
        : kind_(kind), sites_(sites), edges_(std::move(edges)) {}

    TopologyKind kind_;
    int sites_;
    std::vector<Edge> edges_;
};

// Per-edge tunneling strengths (aligned with Topology::edges()) and the on-site
// interaction. Energies are in units where U = 1 unless stated otherwise.
struct CouplingSet {
    std::vector<double> tunneling;
    double interaction = 1.0;
    double disorder = 0.0;
};

CouplingSet homogeneous_couplings(const Topology& topology, double tunneling,
                                  double interaction = 1.0);

/// Independent uniform draws in [J(1-δ), J(1+δ)] per edge, deterministic in `seed`.
CouplingSet sample_disordered_couplings(double tunneling, double disorder,
                                        const Topology& topology, std::uint64_t seed,
                                        double interaction = 1.0);

/// H = -Σ_edges J_e (b†_a b_b + h.c.) + (U/2) Σ_j n_j (n_j - 1).
OperatorMatrix build_hamiltonian(const FockBasis& basis, const Topology& topology,
                                 const CouplingSet& couplings);

/// Same as build_hamiltonian but without the positivity check on U; used to
/// split the Hamiltonian into hopping and interaction parts.
OperatorMatrix build_hamiltonian_terms(const FockBasis& basis, const Topology& topology,
                                       const CouplingSet& couplings);

} // namespace bhqrc
