#include <doctest.h>

#include <cmath>

#include "bhqrc/fock.hpp"
#include "bhqrc/lattice.hpp"

using namespace bhqrc;

TEST_CASE("product basis sizes and lexicographic order") {
    CHECK(FockBasis::product(5, 3).size() == 1024);
    const auto single = FockBasis::product(1, 0);
    REQUIRE(single.size() == 1);
    CHECK(single.state(0) == Occupation{0});

    const auto two = FockBasis::product(2, 1);
    REQUIRE(two.size() == 4);
    CHECK(two.state(0) == Occupation{0, 0});
    CHECK(two.state(1) == Occupation{0, 1});
    CHECK(two.state(2) == Occupation{1, 0});
    CHECK(two.state(3) == Occupation{1, 1});
    CHECK(two.dump() == "(0,0)\n(0,1)\n(1,0)\n(1,1)\n");

    // mixed-radix index, site 0 most significant
    const auto b = FockBasis::product(3, 2);
    for (std::size_t i = 0; i < b.size(); ++i) {
        const auto& s = b.state(i);
        CHECK(static_cast<std::size_t>(s[0] * 9 + s[1] * 3 + s[2]) == i);
        CHECK(b.index_of(s) == i);
    }
    CHECK_FALSE(b.index_of({3, 0, 0}).has_value());
    CHECK_THROWS_AS(FockBasis::product(11, 3), std::length_error);
    CHECK_THROWS_AS(FockBasis::product(0, 3), std::invalid_argument);
}

TEST_CASE("number sector sizes follow stars and bars") {
    CHECK(FockBasis::number_sector(5, 5).size() == 126);
    CHECK(FockBasis::number_sector(6, 6).size() == 462);
    const auto empty = FockBasis::number_sector(2, 0);
    REQUIRE(empty.size() == 1);
    CHECK(empty.state(0) == Occupation{0, 0});
    const auto sector = FockBasis::number_sector(4, 3);
    for (const auto& s : sector.states()) {
        int total = 0;
        for (int n : s) total += n;
        CHECK(total == 3);
    }
    CHECK(FockBasis::number_sector(4, 3).states() == FockBasis::number_sector(4, 3).states());
}

TEST_CASE("sector dimensions of the product space add up") {
    const int sites = 4;
    const int cutoff = 2;
    const auto product = FockBasis::product(sites, cutoff);
    std::size_t sum = 0;
    for (int k = 0; k <= sites * cutoff; ++k) {
        std::size_t count = 0;
        for (const auto& s : product.states()) {
            int total = 0;
            for (int n : s) total += n;
            count += total == k;
        }
        sum += count;
    }
    CHECK(sum == 81);
}

TEST_CASE("single-site ladder operators") {
    const auto b = FockBasis::product(1, 2);
    const RealMatrix a = annihilation_matrix(b, 0);
    RealMatrix expected = RealMatrix::Zero(3, 3);
    expected(0, 1) = 1.0;
    expected(1, 2) = std::sqrt(2.0);
    CHECK((a - expected).norm() < 1e-15);
    CHECK((creation_matrix(b, 0) - a.transpose()).norm() == 0.0);
    CHECK((a * RealVector::Unit(3, 0)).norm() == 0.0);
    const RealMatrix n = creation_matrix(b, 0) * a;
    CHECK((n - RealVector(RealVector::LinSpaced(3, 0, 2)).asDiagonal().toDenseMatrix()).norm() < 1e-14);
    CHECK((number_matrix(b, 0) - n).norm() < 1e-14);
    CHECK_THROWS_AS(annihilation_matrix(b, 1), std::out_of_range);
    CHECK_THROWS(annihilation_matrix(FockBasis::number_sector(2, 1), 0));
}

TEST_CASE("number operators are diagonal and commute") {
    const auto b = FockBasis::product(2, 1);
    const RealMatrix n1 = number_matrix(b, 1);
    CHECK(n1.diagonal() == RealVector((RealVector(4) << 0, 1, 0, 1).finished()));
    CHECK((n1 - RealMatrix(n1.diagonal().asDiagonal())).norm() == 0.0);
    const auto c = FockBasis::product(3, 2);
    double occupation_sum = 0.0;
    for (const auto& s : c.states()) occupation_sum += s[1];
    CHECK(number_matrix(c, 1).trace() == doctest::Approx(occupation_sum));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const RealMatrix ni = number_matrix(c, i);
            const RealMatrix nj = number_matrix(c, j);
            CHECK((ni * nj - nj * ni).norm() == 0.0);
        }
}

TEST_CASE("canonical commutator holds below the cutoff") {
    const int cutoff = 3;
    const auto b = FockBasis::product(2, cutoff);
    for (int site = 0; site < 2; ++site) {
        const RealMatrix a = annihilation_matrix(b, site);
        const RealMatrix comm = a * a.transpose() - a.transpose() * a;
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (b.state(i)[static_cast<std::size_t>(site)] >= cutoff) continue;
            for (std::size_t j = 0; j < b.size(); ++j) {
                if (b.state(j)[static_cast<std::size_t>(site)] >= cutoff) continue;
                CHECK(comm(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
                      doctest::Approx(i == j ? 1.0 : 0.0));
            }
        }
    }
}

TEST_CASE("reflection parity split") {
    const auto two = FockBasis::number_sector(2, 1); // (0,1), (1,0)
    const auto small = reflection_parity_split(two);
    REQUIRE(small.even.cols() == 1);
    REQUIRE(small.odd.cols() == 1);
    const double h = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(small.even(0, 0)) == doctest::Approx(h));
    CHECK(small.even(0, 0) == doctest::Approx(small.even(1, 0)));
    CHECK(small.odd(0, 0) == doctest::Approx(-small.odd(1, 0)));

    for (int n : {5, 6, 7}) {
        const auto sector = FockBasis::number_sector(n, n);
        const auto split = reflection_parity_split(sector);
        CHECK(static_cast<std::size_t>(split.even.cols() + split.odd.cols()) == sector.size());
        RealMatrix q(split.even.rows(), split.even.cols() + split.odd.cols());
        q << split.even, split.odd;
        CHECK((q.transpose() * q - RealMatrix::Identity(q.cols(), q.cols())).norm() < 1e-12);
        const RealMatrix r = reflection_matrix(sector);
        CHECK((r * split.even - split.even).norm() < 1e-12);
        CHECK((r * split.odd + split.odd).norm() < 1e-12);
    }
    CHECK(reflection_parity_split(FockBasis::number_sector(5, 5)).odd.cols() == 60);
    CHECK(reflection_parity_split(FockBasis::number_sector(6, 6)).odd.cols() == 226);
    CHECK_THROWS(reflection_parity_split(FockBasis::product(2, 1)));
}

TEST_CASE("parity sectors block-diagonalize the chain Hamiltonian") {
    const auto sector = FockBasis::number_sector(5, 5);
    const Topology chain(TopologyKind::OpenChain, 5);
    const RealMatrix h = build_hamiltonian(sector, chain, homogeneous_couplings(chain, 0.4));
    const auto split = reflection_parity_split(sector);
    CHECK((split.even.transpose() * h * split.odd).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("hopping drops transitions above the cutoff") {
    const auto b = FockBasis::product(2, 1);
    const RealMatrix hop = hopping_matrix(b, 0, 1); // b†_0 b_1
    // |0,1> -> |1,0> with amplitude 1, |1,1> would need n_0 = 2 and is dropped
    CHECK(hop(2, 1) == doctest::Approx(1.0));
    CHECK(hop.col(3).norm() == 0.0);
    CHECK(hop.cwiseAbs().sum() == doctest::Approx(1.0));
}
