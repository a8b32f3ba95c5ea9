#pragma once

// Model indicators for the two stages, the single-flip proposal kernel, and
// the validity constraint that keeps every visited pair an instrumental
// variable specification.

#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "ivbma/rng.hpp"

namespace ivbma {

// Inclusion indicator for the outcome equation: slot 0 is the endogenous
// regressor X, slots 1..p the columns of W. May be all zero.
struct SecondStageModel {
    std::vector<std::uint8_t> include;

    std::size_t size() const { return include.size(); }
    std::size_t active_count() const {
        return std::accumulate(include.begin(), include.end(), std::size_t(0));
    }
    bool includes_endogenous() const { return !include.empty() && include[0] != 0; }
    bool operator==(const SecondStageModel&) const = default;
};

// Inclusion indicator for the instrument equation: slots 0..q-1 are the
// columns of Z, slots q..q+p-1 the columns of W. n_instruments stores q so
// the two blocks can be told apart.
struct FirstStageModel {
    std::vector<std::uint8_t> include;
    std::size_t n_instruments = 0;

    std::size_t size() const { return include.size(); }
    std::size_t active_count() const {
        return std::accumulate(include.begin(), include.end(), std::size_t(0));
    }
    bool operator==(const FirstStageModel&) const = default;
};

struct ModelPair {
    SecondStageModel L;
    FirstStageModel M;
};

// A pair is estimable iff M \ L is nonempty: the instrument equation uses
// at least one variable the outcome equation excludes. Instruments never
// appear in L, so any included instrument settles it; an included W column
// counts only when that same column is absent from L.
inline bool is_valid_pair(const SecondStageModel& L, const FirstStageModel& M) {
    const std::size_t q = M.n_instruments;
    for (std::size_t j = 0; j < q; ++j)
        if (M.include[j]) return true;
    for (std::size_t k = q; k < M.include.size(); ++k)
        if (M.include[k] && !L.include[1 + (k - q)]) return true;
    return false;
}

inline bool is_valid_pair(const ModelPair& pair) {
    return is_valid_pair(pair.L, pair.M);
}

// Uniform prior over valid pairs, unnormalized: 0 inside, -inf outside.
inline double log_prior(const ModelPair& pair) {
    return is_valid_pair(pair) ? 0.0
                               : -std::numeric_limits<double>::infinity();
}

// Uniform single-flip proposal: flip one slot chosen uniformly. Every model
// has the same number of neighbors, so the proposal is symmetric and its
// density cancels from the acceptance ratio.
template <typename Model>
inline Model neighborhood_propose(const Model& current, RngStream& rng) {
    Model proposal = current;
    const std::size_t slot = rng.uniform_index(proposal.include.size());
    proposal.include[slot] ^= 1;
    return proposal;
}

}  // namespace ivbma
