#include "smj/tree.hpp"

#include "smj/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace smj {

void TreeConfig::validate() const {
    params.validate();
    if (half_depth == 0) throw config_error("TreeConfig: half_depth must be positive");
    if (delta_seq.size() != half_depth || slack_seq.size() != half_depth) {
        throw config_error("TreeConfig: schedule lengths must equal the half depth");
    }
    for (uint64_t d : delta_seq) {
        if (d == 0 || d > universe_prime) {
            throw config_error("TreeConfig: each Delta_i must lie in [1, q]");
        }
    }
    if (repetitions == 0) throw config_error("TreeConfig: repetitions must be >= 1");
    if (!is_prime(universe_prime)) throw config_error("TreeConfig: universe size must be prime");
    double kq = thresholds.t_q * half_depth;
    double ku = thresholds.t_u * half_depth;
    if (std::fabs(kq - std::round(kq)) > 1e-9 || std::fabs(ku - std::round(ku)) > 1e-9) {
        throw config_error("TreeConfig: t*K must be integral");
    }
}

std::vector<uint64_t> delta_sequence(double delta, uint32_t half_depth) {
    if (!(delta >= 1.0)) throw config_error("delta_sequence: delta must be >= 1");
    std::vector<uint64_t> out;
    out.reserve(half_depth);
    double log2_delta = std::log2(delta);
    uint64_t prev = 0;
    for (uint32_t i = 1; i <= half_depth; ++i) {
        auto cum = static_cast<uint64_t>(std::floor(i * log2_delta + 1e-12));
        uint64_t step = cum - prev;
        if (step >= 63) throw config_error("delta_sequence: branching factor overflows 64 bits");
        out.push_back(uint64_t{1} << step);
        prev = cum;
    }
    return out;
}

std::vector<std::array<double, 2>> slack_schedule(const Thresholds& thr, uint32_t half_depth) {
    std::vector<std::array<double, 2>> out(half_depth);
    double sq = std::sqrt(std::max(0.0, thr.t_q * (1.0 - thr.t_q)));
    double su = std::sqrt(std::max(0.0, thr.t_u * (1.0 - thr.t_u)));
    double log_term = std::log(3.0 * half_depth);
    for (uint32_t l = 1; l < half_depth; ++l) {
        double scale = std::sqrt(6.5 * l * log_term);
        out[l - 1] = {sq * scale, su * scale};
    }
    out[half_depth - 1] = {0.0, 0.0};
    return out;
}

double snap_threshold(double t, double w, uint32_t half_depth) {
    const uint32_t K = half_depth;
    double on_grid = std::round(t * K) / K;
    if (std::fabs(on_grid - t) < 1e-9 && std::fabs(t - w) > 1e-9) return on_grid;

    // Endpoint filters (t = 0 or 1) have no slack schedule and behave like a
    // different family; prefer an interior grid point unless every one of them
    // distorts the threshold beyond 0.2.
    const double endpoint_fallback = 0.2;
    double best_interior = -1.0, best_interior_dist = std::numeric_limits<double>::infinity();
    double best_any = -1.0, best_any_dist = std::numeric_limits<double>::infinity();
    for (uint32_t m = 0; m <= K; ++m) {
        double cand = static_cast<double>(m) / K;
        if (std::fabs(cand - w) <= 1e-9) continue;
        double dist = std::fabs(cand - t);
        if (m != 0 && m != K && dist < best_interior_dist) {
            best_interior_dist = dist;
            best_interior = cand;
        }
        if (dist < best_any_dist) {
            best_any_dist = dist;
            best_any = cand;
        }
    }
    if (best_interior >= 0.0 && best_interior_dist <= endpoint_fallback) return best_interior;
    if (best_any >= 0.0) return best_any;
    throw config_error("snap_threshold: no feasible grid point (every multiple of 1/K equals w)");
}

HashFamily family_for(const TreeConfig& config, uint32_t rep, uint32_t half) {
    if (half != 1 && half != 2) throw std::invalid_argument("family_for: half must be 1 or 2");
    uint64_t seed = derive(derive(config.master_seed, 0x100 + rep), half);
    return HashFamily(seed, config.universe_prime, config.half_depth);
}

namespace {

struct Node {
    std::vector<uint32_t> elements;
    uint64_t prefix_sum;  // sum a_j r_j mod q
    uint32_t score;
};

}  // namespace

std::vector<DecodedPath> decode(const TreeConfig& config, uint32_t rep, uint32_t half,
                                std::span<const uint32_t> sorted_set, double t, Side side) {
    config.validate();
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("decode: t outside [0,1]");
    for (size_t i = 0; i + 1 < sorted_set.size(); ++i) {
        if (sorted_set[i] >= sorted_set[i + 1]) {
            throw std::invalid_argument("decode: set must be sorted without duplicates");
        }
    }
    if (!sorted_set.empty() && sorted_set.back() >= config.universe_prime) {
        throw std::invalid_argument("decode: set elements must lie in [0, q)");
    }

    const uint64_t q = config.universe_prime;
    const uint32_t K = config.half_depth;
    const Direction dir = side == Side::query ? config.dir_q : config.dir_u;
    const int coord = side == Side::query ? 0 : 1;
    // at_most supermajorities count absences against the complement threshold,
    // which keeps the >= trimming rule below unchanged.
    const bool negate = dir == Direction::at_most;
    const double t_eff = negate ? 1.0 - t : t;

    HashFamily family = family_for(config, rep, half);

    // Member tables are built lazily: levels whose whole expansion goes
    // through sample_universe never pay the sort.
    std::vector<std::unique_ptr<SortedMemberTable>> tables(K);
    auto table_at = [&](uint32_t level) -> const SortedMemberTable& {
        if (!tables[level - 1]) {
            tables[level - 1] = std::make_unique<SortedMemberTable>(
                sorted_set, family.level(level).a, q);
        }
        return *tables[level - 1];
    };
    auto is_member = [&](uint32_t x) {
        return std::binary_search(sorted_set.begin(), sorted_set.end(), x);
    };

    std::vector<Node> frontier;
    frontier.push_back(Node{{}, 0, 0});
    std::vector<Node> next;

    for (uint32_t level = 1; level <= K; ++level) {
        const auto& lvl = family.level(level);
        const uint64_t delta = config.delta_seq[level - 1];
        const double cut = t_eff * level - config.slack_seq[level - 1][coord];
        next.clear();

        for (const Node& node : frontier) {
            uint64_t eta = (node.prefix_sum + lvl.b) % q;
            // If the inherited score already clears the cut, every admitted
            // child survives; otherwise only matching children can.
            bool all_children_survive = static_cast<double>(node.score) >= cut - 1e-9;

            auto push_child = [&](uint32_t x, bool matched) {
                Node child;
                child.elements = node.elements;
                child.elements.push_back(x);
                child.prefix_sum = (node.prefix_sum + mulmod(lvl.a, x, q)) % q;
                child.score = node.score + (matched ? 1 : 0);
                if (static_cast<double>(child.score) >= cut - 1e-9) {
                    next.push_back(std::move(child));
                }
            };

            if (all_children_survive) {
                for (uint32_t x : sample_universe(eta, lvl.a, delta, q)) {
                    bool member = is_member(x);
                    push_child(x, negate ? !member : member);
                }
            } else if (!negate) {
                for (uint32_t x : sample_members(eta, lvl.a, delta, table_at(level))) {
                    push_child(x, true);
                }
            } else {
                for (uint32_t x : sample_universe(eta, lvl.a, delta, q)) {
                    if (!is_member(x)) push_child(x, true);
                }
            }
        }
        frontier.swap(next);
        if (frontier.empty()) break;
    }

    std::vector<DecodedPath> out;
    out.reserve(frontier.size());
    for (Node& node : frontier) {
        out.push_back(DecodedPath{std::move(node.elements), node.score});
    }
    return out;
}

namespace {

// Shared-path collision of a synthetic planted pair in one repetition, across
// both tensored halves.
bool pair_collides(const TreeConfig& config, uint32_t rep,
                   const std::vector<uint32_t>& x, const std::vector<uint32_t>& y) {
    for (uint32_t half = 1; half <= 2; ++half) {
        auto rx = decode(config, rep, half, x, config.thresholds.t_q, Side::query);
        if (rx.empty()) return false;
        auto ry = decode(config, rep, half, y, config.thresholds.t_u, Side::update);
        if (ry.empty()) return false;
        bool shared = false;
        for (const auto& a : rx) {
            for (const auto& b : ry) {
                if (a.elements == b.elements) {
                    shared = true;
                    break;
                }
            }
            if (shared) break;
        }
        if (!shared) return false;
    }
    return true;
}

}  // namespace

double pilot_collision_probability(const TreeConfig& config, uint32_t pairs, uint64_t seed) {
    const uint64_t q = config.universe_prime;
    const auto& p = config.params;
    auto sq = static_cast<uint64_t>(std::llround(p.w_q * q));
    auto su = static_cast<uint64_t>(std::llround(p.w_u * q));
    auto s1 = static_cast<uint64_t>(std::llround(p.w_1 * q));
    uint64_t hits = 0;
    for (uint32_t trial = 0; trial < pairs; ++trial) {
        Rng rng(derive(derive(seed, 0x91107), trial));
        std::vector<uint32_t> x = rng.sorted_subset(q, sq);
        std::vector<uint32_t> inter = rng.sorted_subset_of(x, s1);
        std::vector<uint32_t> rest;
        rest.reserve(q - sq);
        // complement of x
        {
            size_t xi = 0;
            for (uint32_t e = 0; e < q; ++e) {
                if (xi < x.size() && x[xi] == e) {
                    ++xi;
                } else {
                    rest.push_back(e);
                }
            }
        }
        std::vector<uint32_t> fill = rng.sorted_subset_of(rest, su - s1);
        std::vector<uint32_t> y(inter);
        y.insert(y.end(), fill.begin(), fill.end());
        std::sort(y.begin(), y.end());
        TreeConfig trial_config = config;
        trial_config.master_seed = derive(derive(seed, 0xbeef), trial);
        if (pair_collides(trial_config, 0, x, y)) ++hits;
    }
    return static_cast<double>(hits) / pairs;
}

TreeConfig configure(const GapParams& params, const Thresholds& snapped, uint32_t half_depth,
                     uint64_t universe_prime, uint64_t seed, uint32_t repetitions) {
    params.validate();
    if (!is_prime(universe_prime)) throw config_error("configure: universe size must be prime");
    TreeConfig config;
    config.half_depth = half_depth;
    config.requested = snapped;
    config.thresholds = snapped;
    config.dir_q = snapped.t_q >= params.w_q ? Direction::at_least : Direction::at_most;
    config.dir_u = snapped.t_u >= params.w_u ? Direction::at_least : Direction::at_most;
    config.params = params;
    config.master_seed = seed;
    config.universe_prime = universe_prime;
    config.repetitions = repetitions;

    RhoBreakdown rb = rho_breakdown(params, snapped);
    config.planned_exponents = rb.exponents;
    config.delta_target = std::exp(rb.div_close);
    config.delta_seq = delta_sequence(config.delta_target, half_depth);
    config.slack_seq = slack_schedule(snapped, half_depth);
    for (uint64_t d : config.delta_seq) {
        if (d > universe_prime) {
            throw config_error("configure: branching factor exceeds the universe");
        }
    }
    config.validate();
    return config;
}

TreeConfig plan(const GapParams& params, const Thresholds& thresholds, uint64_t n,
                uint64_t universe_prime, uint64_t seed, const PlanOptions& options) {
    params.validate();
    if (!params.correlated()) {
        throw config_error("plan: requires w_1 >= w_q*w_u");
    }
    if (!is_prime(universe_prime)) throw config_error("plan: universe size must be prime");

    uint32_t k = tree_depth(n, params, thresholds);
    uint32_t K = k / 2;

    Thresholds snapped{snap_threshold(thresholds.t_q, params.w_q, K),
                       snap_threshold(thresholds.t_u, params.w_u, K)};
    TreeConfig config = configure(params, snapped, K, universe_prime, seed, 1);
    config.requested = thresholds;
    config.snap_distortion_q = std::fabs(snapped.t_q - thresholds.t_q);
    config.snap_distortion_u = std::fabs(snapped.t_u - thresholds.t_u);

    if (options.reps_override) {
        config.repetitions = *options.reps_override;
        if (config.repetitions == 0) throw config_error("plan: repetitions override must be >= 1");
        return config;
    }

    // Pilot Monte Carlo for the per-repetition collision probability. The
    // repetition count uses a lower confidence bound of the estimate so that
    // pilot noise errs toward extra repetitions rather than lost recall.
    uint32_t pairs = std::max<uint32_t>(options.pilot_pairs, 50);
    double p_hat = pilot_collision_probability(config, pairs, derive(seed, 0xca11));
    if (p_hat == 0.0) {
        pairs *= 4;
        p_hat = pilot_collision_probability(config, pairs, derive(seed, 0xca12));
    }
    if (p_hat == 0.0) {
        throw config_error("plan: pilot found no close-pair collisions; filters too aggressive");
    }
    double se = std::sqrt(p_hat * (1.0 - p_hat) / pairs);
    double p_lcb = std::max(p_hat - 2.0 * se, 0.5 * p_hat);
    double need = std::log(1.0 / (1.0 - options.target_recall)) / p_lcb;
    config.repetitions = static_cast<uint32_t>(
        std::clamp<double>(std::ceil(need), 1.0, options.max_repetitions));
    config.pilot_collision = p_hat;
    return config;
}

}  // namespace smj
