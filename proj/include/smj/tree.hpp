#pragma once

#include "smj/divergence.hpp"
#include "smj/exponents.hpp"
#include "smj/hashing.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace smj {

/// Direction of a supermajority requirement. Thresholds below the ambient
/// density flip to at_most; decoding then counts the complement indicator
/// against threshold 1-t so the pruning keeps its >= form.
enum class Direction : uint8_t { at_least = 0, at_most = 1 };

/// Complete filter-tree plan. Two half-instances of depth K are tensored, so
/// the full representative length is k = 2K.
struct TreeConfig {
    uint32_t half_depth = 0;                       ///< K = k/2
    Thresholds thresholds{0, 0};                   ///< snapped to multiples of 1/K
    Thresholds requested{0, 0};                    ///< pre-snap inputs
    double snap_distortion_q = 0, snap_distortion_u = 0;
    Direction dir_q = Direction::at_least;
    Direction dir_u = Direction::at_least;
    double delta_target = 0;                       ///< exp(D(T_1||P_1)) at the snapped thresholds
    std::vector<uint64_t> delta_seq;               ///< per-level power-of-two branching
    std::vector<std::array<double, 2>> slack_seq;  ///< c_l pairs; terminal slack is zero
    uint32_t repetitions = 1;
    uint64_t master_seed = 0;
    uint64_t universe_prime = 0;
    GapParams params{0, 0, 0, 0};
    ExponentPair planned_exponents{0, 0};
    double pilot_collision = 0;                    ///< per-repetition close-pair estimate (0 if overridden)

    void validate() const;
};

/// Greedy power-of-two branching: cumulative exponent floor(i * log2(delta)),
/// so prod_{j<=i} delta_j <= delta^i < 2 prod_{j<=i} delta_j for all i.
std::vector<uint64_t> delta_sequence(double delta, uint32_t half_depth);

/// Slack schedule c_l = (sqrt(t_q(1-t_q)), sqrt(t_u(1-t_u))) * sqrt(6.5 l ln(3K))
/// for l < K; the terminal slack c_K is zero.
std::vector<std::array<double, 2>> slack_schedule(const Thresholds& thr, uint32_t half_depth);

/// Snap t to a multiple of 1/K, never landing on w. Prefers the nearest
/// interior grid point; when every interior point distorts the threshold by
/// more than 0.2 the nearest endpoint (pure AND / NOT-AND filter) is used
/// instead. Values already on the grid are kept as-is.
double snap_threshold(double t, double w, uint32_t half_depth);

struct PlanOptions {
    std::optional<uint32_t> reps_override;
    double target_recall = 0.9;
    uint32_t pilot_pairs = 400;  ///< close pairs per pilot round
    uint32_t max_repetitions = 4096;
};

/// Full plan for a dataset of n points over the prime universe q: depth from
/// tree_depth, snapped thresholds, branching and slack schedules, and a
/// repetition count calibrated by a pilot estimate of the per-repetition
/// close-pair collision probability (unless overridden).
TreeConfig plan(const GapParams& params, const Thresholds& thresholds, uint64_t n,
                uint64_t universe_prime, uint64_t seed, const PlanOptions& options = {});

/// Assemble a config at explicitly chosen depth and (on-grid) thresholds;
/// branching, slack, directions and exponents are derived as in plan().
TreeConfig configure(const GapParams& params, const Thresholds& snapped, uint32_t half_depth,
                     uint64_t universe_prime, uint64_t seed, uint32_t repetitions);

/// A surviving root-to-leaf path: its K universe elements and the running
/// count of matched membership indicators.
struct DecodedPath {
    std::vector<uint32_t> elements;
    uint32_t score = 0;
};

/// All depth-K paths whose every prefix passes both the hash admission
/// h_i(prefix) < Delta_i and the trimming rule score >= t*l - c_l, under the
/// (repetition, half)-specific hash family. half is 1 or 2. X must be sorted
/// and duplicate-free. side selects the slack coordinate; the direction flag
/// for that side decides whether matches are memberships or absences.
std::vector<DecodedPath> decode(const TreeConfig& config, uint32_t rep, uint32_t half,
                                std::span<const uint32_t> sorted_set, double t, Side side);

/// Hash family used by decode for a given repetition and half.
HashFamily family_for(const TreeConfig& config, uint32_t rep, uint32_t half);

/// Per-repetition close-pair collision probability, estimated on synthetic
/// planted pairs. Exposed for tests; plan() uses it internally.
double pilot_collision_probability(const TreeConfig& config, uint32_t pairs, uint64_t seed);

}  // namespace smj
