#include "bhqrc/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace bhqrc {

namespace {

void check_site(const FockBasis& basis, int site) {
    if (site < 0 || site >= basis.sites()) {
        throw std::out_of_range("site " + std::to_string(site) + " outside [0, " +
                                std::to_string(basis.sites()) + ")");
    }
}

// Product of (cutoff+1) over sites, or 0 if it would exceed `limit`.
std::size_t bounded_power(int base, int exponent, std::size_t limit) {
    std::size_t value = 1;
    for (int i = 0; i < exponent; ++i) {
        value *= static_cast<std::size_t>(base);
        if (value > limit) return 0;
    }
    return value;
}

void enumerate_sector(int sites, int remaining, Occupation& current, int position,
                      std::vector<Occupation>& out, std::size_t max_states) {
    if (position == sites - 1) {
        current[position] = remaining;
        out.push_back(current);
        if (out.size() > max_states) {
            throw std::length_error("number sector exceeds the configured maximum of " +
                                    std::to_string(max_states) + " states");
        }
        return;
    }
    for (int n = 0; n <= remaining; ++n) {
        current[position] = n;
        enumerate_sector(sites, remaining - n, current, position + 1, out, max_states);
    }
}

} // namespace

FockBasis::FockBasis(Mode mode, int sites, int max_occupation, std::vector<Occupation> states)
    : mode_(mode), sites_(sites), max_occupation_(max_occupation), states_(std::move(states)) {
    for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
}

FockBasis FockBasis::product(int sites, int cutoff, std::size_t max_states) {
    if (sites < 1) throw std::invalid_argument("sites must be >= 1");
    if (cutoff < 0) throw std::invalid_argument("cutoff must be >= 0");
    const std::size_t dim = bounded_power(cutoff + 1, sites, max_states);
    if (dim == 0) {
        throw std::length_error("product basis (" + std::to_string(cutoff + 1) + "^" +
                                std::to_string(sites) + ") exceeds the configured maximum of " +
                                std::to_string(max_states) + " states");
    }
    std::vector<Occupation> states;
    states.reserve(dim);
    Occupation current(static_cast<std::size_t>(sites), 0);
    for (std::size_t i = 0; i < dim; ++i) {
        states.push_back(current);
        for (int s = sites - 1; s >= 0; --s) {
            if (++current[s] <= cutoff) break;
            current[s] = 0;
        }
    }
    return FockBasis(Mode::ProductCutoff, sites, cutoff, std::move(states));
}

FockBasis FockBasis::number_sector(int sites, int total, std::size_t max_states) {
    if (sites < 1) throw std::invalid_argument("sites must be >= 1");
    if (total < 0) throw std::invalid_argument("total number must be >= 0");
    std::vector<Occupation> states;
    Occupation current(static_cast<std::size_t>(sites), 0);
    enumerate_sector(sites, total, current, 0, states, max_states);
    return FockBasis(Mode::NumberSector, sites, total, std::move(states));
}

int FockBasis::cutoff() const {
    if (mode_ != Mode::ProductCutoff) throw std::logic_error("basis is a number sector");
    return max_occupation_;
}

int FockBasis::total() const {
    if (mode_ != Mode::NumberSector) throw std::logic_error("basis is a product-cutoff space");
    return max_occupation_;
}

std::optional<std::size_t> FockBasis::index_of(const Occupation& occupation) const {
    if (auto it = index_.find(occupation); it != index_.end()) return it->second;
    return std::nullopt;
}

std::string FockBasis::dump() const {
    std::ostringstream out;
    for (const auto& s : states_) {
        out << '(';
        for (std::size_t j = 0; j < s.size(); ++j) out << (j ? "," : "") << s[j];
        out << ")\n";
    }
    return out.str();
}

OperatorMatrix annihilation_matrix(const FockBasis& basis, int site) {
    check_site(basis, site);
    if (basis.mode() != FockBasis::Mode::ProductCutoff) {
        throw std::invalid_argument(
            "ladder operators need a product-cutoff basis; number sectors only support "
            "number-conserving operators");
    }
    const auto dim = static_cast<Eigen::Index>(basis.size());
    OperatorMatrix b = OperatorMatrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        Occupation target = basis.state(static_cast<std::size_t>(col));
        const int n = target[site];
        if (n == 0) continue;
        target[site] = n - 1;
        const auto row = basis.index_of(target);
        b(static_cast<Eigen::Index>(*row), col) = std::sqrt(static_cast<double>(n));
    }
    return b;
}

OperatorMatrix creation_matrix(const FockBasis& basis, int site) {
    return annihilation_matrix(basis, site).transpose();
}

OperatorMatrix number_matrix(const FockBasis& basis, int site) {
    check_site(basis, site);
    const auto dim = static_cast<Eigen::Index>(basis.size());
    OperatorMatrix n = OperatorMatrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) n(i, i) = basis.state(static_cast<std::size_t>(i))[site];
    return n;
}

OperatorMatrix hopping_matrix(const FockBasis& basis, int to, int from) {
    check_site(basis, to);
    check_site(basis, from);
    if (to == from) return number_matrix(basis, to);
    const auto dim = static_cast<Eigen::Index>(basis.size());
    OperatorMatrix h = OperatorMatrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        Occupation target = basis.state(static_cast<std::size_t>(col));
        const int n_from = target[from];
        const int n_to = target[to];
        if (n_from == 0 || n_to + 1 > basis.max_occupation()) continue;
        target[from] = n_from - 1;
        target[to] = n_to + 1;
        const auto row = basis.index_of(target);
        if (!row) continue;
        h(static_cast<Eigen::Index>(*row), col) =
            std::sqrt(static_cast<double>(n_from) * static_cast<double>(n_to + 1));
    }
    return h;
}

OperatorMatrix total_number_matrix(const FockBasis& basis) {
    const auto dim = static_cast<Eigen::Index>(basis.size());
    OperatorMatrix n = OperatorMatrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const auto& s = basis.state(static_cast<std::size_t>(i));
        n(i, i) = std::accumulate(s.begin(), s.end(), 0);
    }
    return n;
}

OperatorMatrix reflection_matrix(const FockBasis& basis) {
    const auto dim = static_cast<Eigen::Index>(basis.size());
    OperatorMatrix p = OperatorMatrix::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        Occupation reversed = basis.state(static_cast<std::size_t>(col));
        std::reverse(reversed.begin(), reversed.end());
        p(static_cast<Eigen::Index>(*basis.index_of(reversed)), col) = 1.0;
    }
    return p;
}

ParitySectors reflection_parity_split(const FockBasis& basis) {
    if (basis.mode() != FockBasis::Mode::NumberSector) {
        throw std::invalid_argument("parity split expects a fixed-number sector basis");
    }
    const auto dim = static_cast<Eigen::Index>(basis.size());
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<std::size_t> palindromes;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        Occupation reversed = basis.state(i);
        std::reverse(reversed.begin(), reversed.end());
        const std::size_t j = *basis.index_of(reversed);
        if (j == i) {
            palindromes.push_back(i);
        } else if (i < j) {
            pairs.emplace_back(i, j);
        }
    }

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const auto n_pairs = static_cast<Eigen::Index>(pairs.size());
    ParitySectors sectors{
        RealMatrix::Zero(dim, n_pairs + static_cast<Eigen::Index>(palindromes.size())),
        RealMatrix::Zero(dim, n_pairs)};
    // Even sector: symmetric pairs first, then palindromes, both in basis order.
    for (Eigen::Index k = 0; k < n_pairs; ++k) {
        const auto [i, j] = pairs[static_cast<std::size_t>(k)];
        sectors.even(static_cast<Eigen::Index>(i), k) = inv_sqrt2;
        sectors.even(static_cast<Eigen::Index>(j), k) = inv_sqrt2;
        sectors.odd(static_cast<Eigen::Index>(i), k) = inv_sqrt2;
        sectors.odd(static_cast<Eigen::Index>(j), k) = -inv_sqrt2;
    }
    for (std::size_t k = 0; k < palindromes.size(); ++k) {
        sectors.even(static_cast<Eigen::Index>(palindromes[k]), n_pairs + static_cast<Eigen::Index>(k)) = 1.0;
    }
    return sectors;
}

} // namespace bhqrc
