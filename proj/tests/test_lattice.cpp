#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "bhqrc/lattice.hpp"

using namespace bhqrc;

TEST_CASE("topology edge counts") {
    for (int n : {3, 4, 5, 6}) {
        CHECK(Topology(TopologyKind::OpenChain, n).edges().size() == static_cast<std::size_t>(n - 1));
        CHECK(Topology(TopologyKind::PeriodicChain, n).edges().size() == static_cast<std::size_t>(n));
        CHECK(Topology(TopologyKind::AllToAll, n).edges().size() == static_cast<std::size_t>(n * (n - 1) / 2));
    }
    const auto ring = Topology(TopologyKind::PeriodicChain, 4).edges();
    CHECK(std::find(ring.begin(), ring.end(), Edge{0, 3}) != ring.end());
    CHECK_THROWS_AS(Topology(TopologyKind::PeriodicChain, 2), std::invalid_argument);
    CHECK(parse_topology("open-chain") == TopologyKind::OpenChain);
    CHECK(parse_topology("periodic") == TopologyKind::PeriodicChain);
    CHECK(parse_topology("all-to-all") == TopologyKind::AllToAll);
    CHECK_THROWS(parse_topology("star"));
}

TEST_CASE("disordered couplings") {
    const Topology t(TopologyKind::PeriodicChain, 6);
    const auto zero = sample_disordered_couplings(0.8, 0.0, t, 1);
    for (double j : zero.tunneling) CHECK(j == 0.8);
    const auto a = sample_disordered_couplings(1.0, 0.3, t, 99);
    const auto b = sample_disordered_couplings(1.0, 0.3, t, 99);
    CHECK(a.tunneling == b.tunneling);
    CHECK(a.tunneling.size() == t.edges().size());
    for (double j : a.tunneling) {
        CHECK(j >= 0.7);
        CHECK(j <= 1.3);
    }
    CHECK(sample_disordered_couplings(1.0, 0.3, t, 100).tunneling != a.tunneling);
    CHECK_THROWS_AS(sample_disordered_couplings(1.0, 1.0, t, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_disordered_couplings(0.0, 0.1, t, 1), std::invalid_argument);
}

TEST_CASE("interaction-only Hamiltonian of one site") {
    const auto b = FockBasis::product(1, 2);
    const Topology t(TopologyKind::OpenChain, 1);
    const RealMatrix h = build_hamiltonian(b, t, homogeneous_couplings(t, 1.0, 2.0));
    CHECK((h - RealVector((RealVector(3) << 0, 0, 2).finished()).asDiagonal().toDenseMatrix()).norm() == 0.0);
}

TEST_CASE("single boson on two sites has energies -J and +J") {
    // Hand-built block in the order (0,1), (1,0): [[0, -J], [-J, 0]].
    const double j = 1.0;
    const auto b = FockBasis::number_sector(2, 1);
    const Topology t(TopologyKind::OpenChain, 2);
    const RealMatrix h = build_hamiltonian(b, t, homogeneous_couplings(t, j, 3.7));
    RealMatrix hand(2, 2);
    hand << 0.0, -j, -j, 0.0;
    CHECK((h - hand).norm() < 1e-15);
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
    CHECK(es.eigenvalues()(0) == doctest::Approx(-1.0));
    CHECK(es.eigenvalues()(1) == doctest::Approx(1.0));
}

TEST_CASE("Hamiltonian symmetries and linearity") {
    const auto product = FockBasis::product(4, 2);
    const auto sector = FockBasis::number_sector(4, 4);
    for (auto kind : {TopologyKind::OpenChain, TopologyKind::PeriodicChain, TopologyKind::AllToAll}) {
        const Topology t(kind, 4);
        const auto couplings = sample_disordered_couplings(0.6, 0.3, t, 7, 1.3);
        const RealMatrix h = build_hamiltonian(product, t, couplings);
        CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-12 * h.cwiseAbs().maxCoeff());
        const RealMatrix n = total_number_matrix(product);
        CHECK((h * n - n * h).cwiseAbs().maxCoeff() < 1e-12);

        CouplingSet hopping_only = couplings;
        hopping_only.interaction = 0.0;
        CouplingSet interaction_only = couplings;
        interaction_only.tunneling.assign(couplings.tunneling.size(), 0.0);
        const RealMatrix sum = build_hamiltonian_terms(product, t, hopping_only) +
                               build_hamiltonian_terms(product, t, interaction_only);
        CHECK((h - sum).cwiseAbs().maxCoeff() < 1e-14);

        const RealMatrix diag = build_hamiltonian(sector, t, interaction_only);
        CHECK((diag - RealMatrix(diag.diagonal().asDiagonal())).norm() == 0.0);

        const RealMatrix hs = build_hamiltonian(sector, t, homogeneous_couplings(t, 0.6));
        const RealMatrix r = reflection_matrix(sector);
        CHECK((hs * r - r * hs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("Hamiltonian rejects inconsistent inputs") {
    const auto b = FockBasis::product(3, 1);
    const Topology t3(TopologyKind::OpenChain, 3);
    const Topology t4(TopologyKind::OpenChain, 4);
    CHECK_THROWS_AS(build_hamiltonian(b, t4, homogeneous_couplings(t4, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(build_hamiltonian(b, t3, homogeneous_couplings(t3, 1.0, 0.0)), std::invalid_argument);
    CHECK_THROWS_AS(build_hamiltonian(b, t3, homogeneous_couplings(t4, 1.0)), std::invalid_argument);
}

TEST_CASE("relabeled topology moves site labels") {
    const Topology chain(TopologyKind::OpenChain, 3);
    const auto moved = chain.relabeled({2, 1, 0});
    for (const auto& e : moved.edges()) CHECK(e.a < e.b);
    CHECK(moved.edges().size() == 2);
}
