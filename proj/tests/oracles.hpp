// Independent reference implementations used only by tests. These stay
// deliberately naive (closed forms, exhaustive scans, trial division) so they
// cannot share failure modes with the library code they check.
#pragma once

#include "smj/divergence.hpp"
#include "smj/rng.hpp"
#include "smj/tree.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace oracles {

// Stationary point of t1 -> D(T(t1)||P) from the quadratic
//   (1-R) t1^2 + (1 - tq - tu + R(tq+tu)) t1 - R tq tu = 0,
// where R is the odds ratio of P. Valid when all P cells are positive and
// R != 1; R == 1 factorizes to t1 = tq*tu.
inline double quadratic_inner_root(double tq, double tu, const smj::JointDistribution& p) {
    double r = p.m11 * p.m22 / (p.m12 * p.m21);
    if (std::fabs(r - 1.0) < 1e-12) return tq * tu;
    double a = 1.0 - r;
    double b = (1.0 - tq - tu) + r * (tq + tu);
    double c = -r * tq * tu;
    double disc = std::sqrt(b * b - 4.0 * a * c);
    double root1 = (-b + disc) / (2.0 * a);
    double root2 = (-b - disc) / (2.0 * a);
    double lo = std::max(0.0, tq + tu - 1.0), hi = std::min(tq, tu);
    for (double root : {root1, root2}) {
        if (root >= lo - 1e-9 && root <= hi + 1e-9) return std::clamp(root, lo, hi);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

// Exhaustive-equivalent grid minimization of D(T(t1)||P): a full pass at a
// coarse step, then a full fine-step pass over the winning neighborhood. The
// objective is strictly convex, so this finds the same grid point as a single
// exhaustive fine scan.
inline double grid_inner_min(double tq, double tu, const smj::JointDistribution& p,
                             double fine_step = 1e-6) {
    double lo = std::max(0.0, tq + tu - 1.0), hi = std::min(tq, tu);
    if (hi - lo < fine_step) return 0.5 * (lo + hi);
    auto eval = [&](double t1) {
        return smj::kl_joint(smj::joint_from_marginals(tq, tu, t1), p);
    };
    double coarse = (hi - lo) / 1000.0;
    double best = lo, best_val = eval(lo);
    for (double t = lo; t <= hi + 1e-15; t += coarse) {
        double v = eval(std::min(t, hi));
        if (v < best_val) {
            best_val = v;
            best = std::min(t, hi);
        }
    }
    double from = std::max(lo, best - 2.0 * coarse), to = std::min(hi, best + 2.0 * coarse);
    for (double t = from; t <= to + 1e-15; t += fine_step) {
        double v = eval(std::min(t, hi));
        if (v < best_val) {
            best_val = v;
            best = std::min(t, hi);
        }
    }
    return best;
}

inline bool trial_division_prime(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t f = 2; f * f <= n; ++f) {
        if (n % f == 0) return false;
    }
    return true;
}

// Random valid parameter tuple, optionally pinned to the random instance.
inline smj::GapParams random_params(smj::Rng& rng, bool random_instance,
                                    double w_lo = 0.05, double w_hi = 0.45) {
    for (;;) {
        double wq = rng.real(w_lo, w_hi);
        double wu = rng.real(w_lo, w_hi);
        double wmin = std::min(wq, wu);
        double w1 = rng.real(std::max(1.2 * wq * wu, 0.25 * wmin), 0.95 * wmin);
        double w2;
        if (random_instance) {
            w2 = wq * wu;
        } else {
            w2 = rng.real(0.1 * w1, 0.9 * w1);
        }
        smj::GapParams p{wq, wu, w1, w2};
        if (w2 > 0 && w2 < w1 && w1 <= wmin) return p;
    }
}

// Symmetric (w, w1, w2) tuple for the balanced closed form.
struct SymmetricTuple {
    double w, w1, w2;
};
inline SymmetricTuple random_symmetric(smj::Rng& rng) {
    double w = rng.real(0.05, 0.45);
    double w1 = rng.real(0.3 * w, 0.95 * w);
    double w2 = rng.real(0.05 * w1, 0.9 * w1);
    return {w, w1, w2};
}

// Every admitted path of the configured half-tree by direct enumeration:
// expand all q children of every admitted prefix through hash_prefix, then
// keep the paths whose every prefix satisfies the trimming rule.
inline std::vector<smj::DecodedPath> brute_force_decode(const smj::TreeConfig& config,
                                                        uint32_t rep, uint32_t half,
                                                        const std::vector<uint32_t>& sorted_set,
                                                        double t, smj::Side side) {
    smj::HashFamily family = smj::family_for(config, rep, half);
    const uint64_t q = config.universe_prime;
    const uint32_t K = config.half_depth;
    const smj::Direction dir =
        side == smj::Side::query ? config.dir_q : config.dir_u;
    const int coord = side == smj::Side::query ? 0 : 1;
    const bool negate = dir == smj::Direction::at_most;
    const double t_eff = negate ? 1.0 - t : t;

    auto member = [&](uint32_t x) {
        return std::binary_search(sorted_set.begin(), sorted_set.end(), x);
    };

    std::vector<std::vector<uint32_t>> frontier{{}};
    for (uint32_t level = 1; level <= K; ++level) {
        std::vector<std::vector<uint32_t>> next;
        for (const auto& prefix : frontier) {
            for (uint64_t x = 0; x < q; ++x) {
                std::vector<uint32_t> child = prefix;
                child.push_back(static_cast<uint32_t>(x));
                if (family.hash_prefix(level, child) >= config.delta_seq[level - 1]) continue;
                // trimming on the fresh prefix
                uint32_t score = 0;
                bool alive = true;
                for (uint32_t l = 1; l <= level; ++l) {
                    bool m = member(child[l - 1]);
                    score += (negate ? !m : m) ? 1 : 0;
                    if (static_cast<double>(score) <
                        t_eff * l - config.slack_seq[l - 1][coord] - 1e-9) {
                        alive = false;
                        break;
                    }
                }
                if (alive) next.push_back(std::move(child));
            }
        }
        frontier = std::move(next);
    }
    std::vector<smj::DecodedPath> out;
    for (auto& elements : frontier) {
        uint32_t score = 0;
        for (uint32_t e : elements) {
            bool m = member(e);
            score += (negate ? !m : m) ? 1 : 0;
        }
        out.push_back(smj::DecodedPath{std::move(elements), score});
    }
    return out;
}

inline bool same_paths(std::vector<smj::DecodedPath> a, std::vector<smj::DecodedPath> b) {
    auto key = [](const smj::DecodedPath& p) { return p.elements; };
    auto cmp = [&](const smj::DecodedPath& x, const smj::DecodedPath& y) {
        return key(x) < key(y);
    };
    std::sort(a.begin(), a.end(), cmp);
    std::sort(b.begin(), b.end(), cmp);
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].elements != b[i].elements || a[i].score != b[i].score) return false;
    }
    return true;
}

}  // namespace oracles
