#pragma once

#include "smj/tree.hpp"

#include <cstdint>

namespace smj {

/// Step law of a 2-d Bernoulli walk: probability matrix
/// [[p, p1-p], [p2-p, 1-p1-p2+p]] with positively correlated coordinates.
struct WalkLaw {
    double p;   ///< probability of the (1,1) step
    double p1;  ///< first-coordinate mean
    double p2;  ///< second-coordinate mean

    /// Throws std::invalid_argument unless all four matrix entries are
    /// nonnegative and p >= p1*p2.
    void validate() const;
};

/// Exact probability that the mean-centered walk stays in the lower-left
/// quadrant: Pr[ for all l <= k : sum_{i<=l} X_i <= (p1, p2) l ].
/// Requires p1*k and p2*k integral. O(k^3) dynamic program in extended
/// precision.
long double quadrant_exact(uint32_t k, const WalkLaw& law);

/// Exact probability that the walk ends exactly on its mean with the
/// rounded-up joint count: Pr[ sum X = (p1 k, p2 k) and sum X1 X2 = ceil(p k) ].
/// Requires p1*k and p2*k integral.
long double point_mass_exact(uint32_t k, const WalkLaw& law);

/// Exact conditional probability that every prefix of the walk stays on or
/// above the mean line, given the final counts:
/// Pr[ for all l : sum_{i<=l} X >= (p1,p2) l | sum X = (p1,p2)k, sum X1X2 = pk ].
/// Requires p*k, p1*k, p2*k integral and k <= 12 (arrangement enumeration).
long double rearrangement_exact(uint32_t k, const WalkLaw& law);

enum class PairRelation { close, far, single_query, single_update };

struct MomentEstimate {
    double mean = 0;
    double std_error = 0;
    double bound = 0;      ///< analytic comparison value
    bool upper_bound = true;  ///< true: mean must stay below; false: above
    bool pass = false;     ///< verdict at 3 standard errors
    uint64_t trials = 0;
};

/// Monte Carlo over fresh hash families and fresh set pairs drawn at the
/// given relation, decoding one depth-K tree per side:
///   single_query / single_update : mean decoded-path count vs the
///       2 Delta^K exp(-K d(t||w)) bound;
///   far : mean shared-path count vs 2 Delta^K exp(-K D(T_2||P_2));
///   close : survival probability vs the 7^-8 K^-14 Delta^K exp(-K D(T_1||P_1)) floor.
/// Weights are taken from the exact rounded set sizes. Deterministic under a
/// fixed seed; trials parallelize with per-trial derived seeds.
MomentEstimate mc_filter_moments(const TreeConfig& config, const GapParams& params,
                                 PairRelation relation, uint64_t trials, uint64_t seed);

}  // namespace smj
