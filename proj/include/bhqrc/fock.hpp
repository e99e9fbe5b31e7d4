#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bhqrc/common.hpp"

namespace bhqrc {

using Occupation = std::vector<int>;

inline constexpr std::size_t kDefaultMaxStates = std::size_t{1} << 20;

// Ordered set of bosonic occupation-number configurations.
//
// Two flavours exist: the product-cutoff space (every site holds 0..cutoff
// bosons) used for the reservoir dynamics, and a fixed total-number sector used
// for spectral diagnostics. States are enumerated lexicographically with site 0
// as the most significant digit, so in product mode the index of a state is its
// mixed-radix value.
class FockBasis {
public:
    enum class Mode { ProductCutoff, NumberSector };

    static FockBasis product(int sites, int cutoff,
                             std::size_t max_states = kDefaultMaxStates);
    static FockBasis number_sector(int sites, int total,
                                   std::size_t max_states = kDefaultMaxStates);

    Mode mode() const noexcept { return mode_; }
    int sites() const noexcept { return sites_; }
    // Largest occupation any single site can hold (cutoff, or total in sector mode).
    int max_occupation() const noexcept { return max_occupation_; }
    int cutoff() const;
    int total() const;

    std::size_t size() const noexcept { return states_.size(); }
    const Occupation& state(std::size_t i) const { return states_.at(i); }
    const std::vector<Occupation>& states() const noexcept { return states_; }
    std::optional<std::size_t> index_of(const Occupation& occupation) const;

    // Newline-separated occupation tuples, e.g. "(0,1,2)".
    std::string dump() const;

private:
    FockBasis(Mode mode, int sites, int max_occupation, std::vector<Occupation> states);

    Mode mode_;
    int sites_;
    int max_occupation_;
    std::vector<Occupation> states_;
    std::map<Occupation, std::size_t> index_;
};

/// Truncated annihilation operator b_site (product-cutoff bases only).
OperatorMatrix annihilation_matrix(const FockBasis& basis, int site);
/// Truncated creation operator, the transpose of annihilation_matrix.
OperatorMatrix creation_matrix(const FockBasis& basis, int site);
OperatorMatrix number_matrix(const FockBasis& basis, int site);
/// b†_to b_from. Number conserving, so valid in both basis modes; transitions
/// that would exceed the per-site maximum are dropped.
OperatorMatrix hopping_matrix(const FockBasis& basis, int to, int from);
OperatorMatrix total_number_matrix(const FockBasis& basis);

// Orthonormal bases of the reflection-symmetric and antisymmetric subspaces
// under site reversal j -> N-1-j. Columns are expressed in the coordinates of
// the parent sector basis.
struct ParitySectors {
    RealMatrix even;
    RealMatrix odd;
};

ParitySectors reflection_parity_split(const FockBasis& basis);

/// Permutation matrix of the site-reversal map acting on the basis.
OperatorMatrix reflection_matrix(const FockBasis& basis);

} // namespace bhqrc
