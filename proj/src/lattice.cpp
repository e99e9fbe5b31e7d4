#include "bhqrc/lattice.hpp"

#include <algorithm>
#include <random>

namespace bhqrc {

std::string_view to_string(TopologyKind kind) {
    switch (kind) {
    case TopologyKind::OpenChain: return "open-chain";
    case TopologyKind::PeriodicChain: return "periodic-chain";
    case TopologyKind::AllToAll: return "all-to-all";
    }
    return "unknown";
}

TopologyKind parse_topology(std::string_view name) {
    if (name == "open-chain" || name == "open") return TopologyKind::OpenChain;
    if (name == "periodic-chain" || name == "periodic") return TopologyKind::PeriodicChain;
    if (name == "all-to-all") return TopologyKind::AllToAll;
    throw ConfigError("unknown topology '" + std::string(name) + "'");
}

Topology::Topology(TopologyKind kind, int sites) : kind_(kind), sites_(sites) {
    if (sites < 1) throw std::invalid_argument("topology needs at least one site");
    switch (kind) {
    case TopologyKind::OpenChain:
        for (int j = 0; j + 1 < sites; ++j) edges_.push_back({j, j + 1});
        break;
    case TopologyKind::PeriodicChain:
        // With two sites the wrap-around bond would duplicate (0,1).
        if (sites < 3) throw std::invalid_argument("periodic chain needs at least 3 sites");
        for (int j = 0; j + 1 < sites; ++j) edges_.push_back({j, j + 1});
        edges_.push_back({0, sites - 1});
        break;
    case TopologyKind::AllToAll:
        for (int a = 0; a < sites; ++a)
            for (int b = a + 1; b < sites; ++b) edges_.push_back({a, b});
        break;
    }
}

Topology Topology::relabeled(const std::vector<int>& position_of) const {
    if (static_cast<int>(position_of.size()) != sites_) {
        throw std::invalid_argument("relabeling must cover every site");
    }
    std::vector<Edge> edges;
    edges.reserve(edges_.size());
    for (const auto& e : edges_) {
        const int a = position_of[static_cast<std::size_t>(e.a)];
        const int b = position_of[static_cast<std::size_t>(e.b)];
        edges.push_back({std::min(a, b), std::max(a, b)});
    }
    return Topology(kind_, sites_, std::move(edges));
}

CouplingSet homogeneous_couplings(const Topology& topology, double tunneling,
                                  double interaction) {
    return CouplingSet{std::vector<double>(topology.edges().size(), tunneling), interaction, 0.0};
}

CouplingSet sample_disordered_couplings(double tunneling, double disorder,
                                        const Topology& topology, std::uint64_t seed,
                                        double interaction) {
    if (!(tunneling > 0.0)) throw std::invalid_argument("tunneling J must be positive");
    if (!(disorder >= 0.0 && disorder < 1.0)) {
        throw std::invalid_argument("disorder level must lie in [0, 1)");
    }
    CouplingSet set{{}, interaction, disorder};
    set.tunneling.reserve(topology.edges().size());
    if (disorder == 0.0) {
        set.tunneling.assign(topology.edges().size(), tunneling);
        return set;
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> draw(tunneling * (1.0 - disorder),
                                                tunneling * (1.0 + disorder));
    for (std::size_t e = 0; e < topology.edges().size(); ++e) set.tunneling.push_back(draw(rng));
    return set;
}

OperatorMatrix build_hamiltonian_terms(const FockBasis& basis, const Topology& topology,
                                       const CouplingSet& couplings) {
    if (basis.sites() != topology.sites()) {
        throw std::invalid_argument("basis has " + std::to_string(basis.sites()) +
                                    " sites but topology has " +
                                    std::to_string(topology.sites()));
    }
    if (couplings.tunneling.size() != topology.edges().size()) {
        throw std::invalid_argument("coupling count does not match the topology edge count");
    }
    const auto dim = static_cast<Eigen::Index>(basis.size());
    OperatorMatrix h = OperatorMatrix::Zero(dim, dim);
    for (std::size_t e = 0; e < topology.edges().size(); ++e) {
        const double j = couplings.tunneling[e];
        if (j == 0.0) continue;
        const auto [a, b] = topology.edges()[e];
        const OperatorMatrix hop = hopping_matrix(basis, a, b);
        h -= j * (hop + hop.transpose());
    }
    const double u = couplings.interaction;
    for (Eigen::Index i = 0; i < dim; ++i) {
        double onsite = 0.0;
        for (int n : basis.state(static_cast<std::size_t>(i))) onsite += n * (n - 1);
        h(i, i) += 0.5 * u * onsite;
    }
    return h;
}

OperatorMatrix build_hamiltonian(const FockBasis& basis, const Topology& topology,
                                 const CouplingSet& couplings) {
    if (!(couplings.interaction > 0.0)) {
        throw std::invalid_argument("on-site interaction U must be positive");
    }
    return build_hamiltonian_terms(basis, topology, couplings);
}

} // namespace bhqrc
