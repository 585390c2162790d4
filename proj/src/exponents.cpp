#include "smj/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace smj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Golden-section minimization of a unimodal-ish f on [a, b].
template <typename F>
double golden_min(F&& f, double a, double b, double tol = 1e-11, int max_iter = 200) {
    const double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < max_iter && b - a > tol; ++i) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

}  // namespace

RhoBreakdown rho_breakdown(const GapParams& params, const Thresholds& thr) {
    params.validate();
    JointDistribution p1 = joint_from_marginals(params.w_q, params.w_u, params.w_1);
    JointDistribution p2 = joint_from_marginals(params.w_q, params.w_u, params.w_2);
    InnerOptimum close = optimize_inner(thr.t_q, thr.t_u, p1);
    InnerOptimum far = optimize_inner(thr.t_q, thr.t_u, p2);
    RhoBreakdown rb;
    rb.t1_close = close.t_1;
    rb.t1_far = far.t_1;
    rb.div_close = close.divergence;
    rb.div_far = far.divergence;
    rb.d_q = kl_binary(thr.t_q, params.w_q);
    rb.d_u = kl_binary(thr.t_u, params.w_u);
    double denom = rb.div_far - rb.d_q;
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        throw config_error("rho_pair: D(T_2||P_2) - d(t_q||w_q) is not positive");
    }
    rb.exponents.rho_q = (rb.div_close - rb.d_q) / denom;
    rb.exponents.rho_u = (rb.div_close - rb.d_u) / denom;
    return rb;
}

ExponentPair rho_pair(const GapParams& params, const Thresholds& thr) {
    return rho_breakdown(params, thr).exponents;
}

uint32_t tree_depth(uint64_t n, const GapParams& params, const Thresholds& thr) {
    if (n < 2) throw std::invalid_argument("tree_depth: n must be >= 2");
    RhoBreakdown rb = rho_breakdown(params, thr);
    double ratio = std::log(static_cast<double>(n)) / (rb.div_far - rb.d_q);
    auto k = static_cast<uint32_t>(2.0 * std::ceil((ratio - 1e-12) / 2.0));
    return std::max<uint32_t>(2, k);
}

double balanced_closed_form(double w, double w_1, double w_2) {
    if (!(0.0 < w_2 && w_2 < w_1 && w_1 <= w && w < 1.0)) {
        throw std::domain_error("balanced_closed_form: need 0 < w_2 < w_1 <= w < 1");
    }
    if (!(1.0 - 2.0 * w + w_2 > 0.0)) {
        throw std::domain_error("balanced_closed_form: union mass exceeds the universe");
    }
    double num = std::log((w_1 / w) * (1.0 - w) / (1.0 - 2.0 * w + w_1));
    double den = std::log((w_2 / w) * (1.0 - w) / (1.0 - 2.0 * w + w_2));
    return num / den;
}

namespace {

// Solves d(t||w) = target on one side of w by bisection.
// branch = +1 searches [w, 1], branch = -1 searches [0, w].
std::optional<double> invert_kl(double target, double w, int branch) {
    double lo = branch > 0 ? w : 0.0;
    double hi = branch > 0 ? 1.0 : w;
    double end = branch > 0 ? hi : lo;
    if (kl_binary(end, w) < target) return std::nullopt;
    double a = w, b = end;
    for (int i = 0; i < 100; ++i) {
        double m = 0.5 * (a + b);
        if (kl_binary(m, w) < target) {
            a = m;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

// Balanced exponent as a function of t_q: t_u is chosen on the branch where
// d(t_u||w_u) = d(t_q||w_q), so rho_q = rho_u there.
double balanced_rho_at(const GapParams& params, double t_q, int branch, Thresholds* out) {
    double target = kl_binary(t_q, params.w_q);
    auto t_u = invert_kl(target, params.w_u, branch);
    if (!t_u) return kInf;
    try {
        Thresholds thr{t_q, *t_u};
        double r = rho_pair(params, thr).rho_q;
        if (out) *out = thr;
        return r;
    } catch (const std::exception&) {
        return kInf;
    }
}

}  // namespace

TradeoffPoint balanced_point(const GapParams& params) {
    params.validate();
    double best = kInf;
    Thresholds best_thr{0, 0};
    for (int branch : {+1, -1}) {
        // Coarse scan, then refine around the leading basins.
        const int grid = 384;
        std::vector<std::pair<double, double>> ranked;  // (rho, t_q)
        for (int i = 1; i < grid; ++i) {
            double t_q = static_cast<double>(i) / grid;
            double r = balanced_rho_at(params, t_q, branch, nullptr);
            if (std::isfinite(r)) ranked.emplace_back(r, t_q);
        }
        // Exact endpoint t_q = 1 (pure AND filters) is a legitimate candidate.
        for (double t_q : {1.0, 1.0 - params.w_u}) {
            double r = balanced_rho_at(params, t_q, branch, nullptr);
            if (std::isfinite(r)) ranked.emplace_back(r, t_q);
        }
        std::sort(ranked.begin(), ranked.end());
        for (size_t s = 0; s < std::min<size_t>(3, ranked.size()); ++s) {
            double center = ranked[s].second;
            double lo = std::max(1.0 / grid, center - 2.0 / grid);
            double hi = std::min(1.0, center + 2.0 / grid);
            double t_q = golden_min(
                [&](double x) { return balanced_rho_at(params, x, branch, nullptr); }, lo, hi);
            Thresholds thr;
            double r = balanced_rho_at(params, t_q, branch, &thr);
            if (r < best) {
                best = r;
                best_thr = thr;
            }
            // The scanned candidate itself may sit on the basin edge.
            if (ranked[s].first < best) {
                balanced_rho_at(params, ranked[s].second, branch, &best_thr);
                best = ranked[s].first;
            }
        }
    }
    if (!std::isfinite(best)) throw config_error("balanced_point: no feasible balanced thresholds");
    return TradeoffPoint{best_thr, ExponentPair{best, best}};
}

namespace {

struct EndpointFamily {
    // One-parameter family of threshold pairs with both rows (or columns) of T
    // proportional to P_1, making D(T_1||P_1) collapse to one marginal term.
    static Thresholds at(const GapParams& p, Side side, double s) {
        if (side == Side::query) {
            double t_1 = s * p.w_1 / p.w_q;
            double t_u = t_1 + (1.0 - s) * (p.w_u - p.w_1) / (1.0 - p.w_q);
            return Thresholds{s, t_u};
        }
        double t_1 = s * p.w_1 / p.w_u;
        double t_q = t_1 + (1.0 - s) * (p.w_q - p.w_1) / (1.0 - p.w_u);
        return Thresholds{t_q, s};
    }
};

double endpoint_objective(const GapParams& params, Side side, double s) {
    try {
        Thresholds thr = EndpointFamily::at(params, side, s);
        if (thr.t_q <= 0.0 || thr.t_q >= 1.0 || thr.t_u <= 0.0 || thr.t_u >= 1.0) return kInf;
        ExponentPair e = rho_pair(params, thr);
        return side == Side::query ? e.rho_u : e.rho_q;
    } catch (const std::exception&) {
        return kInf;
    }
}

}  // namespace

Thresholds endpoint_thresholds(const GapParams& params, Side side) {
    params.validate();
    if (!(params.w_1 > params.w_q * params.w_u + 1e-12)) {
        throw infeasibility_error("endpoint_thresholds: requires w_1 > w_q*w_u");
    }
    const int grid = 256;
    double best = kInf, best_s = -1.0;
    for (int i = 1; i < grid; ++i) {
        double s = static_cast<double>(i) / grid;
        double v = endpoint_objective(params, side, s);
        if (v < best) {
            best = v;
            best_s = s;
        }
    }
    if (!std::isfinite(best)) {
        throw infeasibility_error("endpoint_thresholds: no valid threshold pair in (0,1)^2");
    }
    double lo = std::max(1.0 / grid, best_s - 2.0 / grid);
    double hi = std::min(1.0 - 1.0 / grid, best_s + 2.0 / grid);
    double s = golden_min([&](double x) { return endpoint_objective(params, side, x); }, lo, hi);
    if (endpoint_objective(params, side, s) > best) s = best_s;
    return EndpointFamily::at(params, side, s);
}

std::vector<TradeoffPoint> tradeoff_curve(const GapParams& params,
                                          const std::vector<double>& budgets) {
    params.validate();

    struct Cand {
        Thresholds thr;
        ExponentPair e;
    };
    std::vector<Cand> cands;
    auto consider = [&](double t_q, double t_u) {
        try {
            Thresholds thr{t_q, t_u};
            cands.push_back({thr, rho_pair(params, thr)});
        } catch (const std::exception&) {
        }
    };
    const int grid = 64;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            consider(0.001 + (0.998 * i) / (grid - 1), 0.001 + (0.998 * j) / (grid - 1));
        }
    }
    consider(1.0 - params.w_u, 1.0 - params.w_q);
    consider(1.0, 1.0);
    try {
        Thresholds t = endpoint_thresholds(params, Side::query);
        consider(t.t_q, t.t_u);
    } catch (const std::exception&) {
    }
    try {
        Thresholds t = endpoint_thresholds(params, Side::update);
        consider(t.t_q, t.t_u);
    } catch (const std::exception&) {
    }

    auto solve_budget = [&](double b) -> TradeoffPoint {
        auto penalized = [&](double t_q, double t_u) {
            try {
                ExponentPair e = rho_pair(params, Thresholds{t_q, t_u});
                double excess = std::max(0.0, e.rho_u - b);
                return e.rho_q + 1e6 * excess;
            } catch (const std::exception&) {
                return kInf;
            }
        };
        std::vector<const Cand*> order;
        for (const auto& c : cands) order.push_back(&c);
        std::sort(order.begin(), order.end(), [&](const Cand* x, const Cand* y) {
            double fx = x->e.rho_q + 1e6 * std::max(0.0, x->e.rho_u - b);
            double fy = y->e.rho_q + 1e6 * std::max(0.0, y->e.rho_u - b);
            return fx < fy;
        });
        double best_val = kInf;
        Thresholds best_thr{1.0, 1.0};
        for (size_t s = 0; s < std::min<size_t>(5, order.size()); ++s) {
            double t_q = order[s]->thr.t_q, t_u = order[s]->thr.t_u;
            // Multi-start coordinate descent; each slice by golden section.
            for (int round = 0; round < 4; ++round) {
                t_q = golden_min([&](double x) { return penalized(x, t_u); },
                                 std::max(1e-4, t_q - 0.06), std::min(1.0, t_q + 0.06));
                t_u = golden_min([&](double x) { return penalized(t_q, x); },
                                 std::max(1e-4, t_u - 0.06), std::min(1.0, t_u + 0.06));
            }
            double v = penalized(t_q, t_u);
            if (v < best_val) {
                best_val = v;
                best_thr = {t_q, t_u};
            }
            // Keep the unrefined candidate if refinement drifted uphill.
            double v0 = penalized(order[s]->thr.t_q, order[s]->thr.t_u);
            if (v0 < best_val) {
                best_val = v0;
                best_thr = order[s]->thr;
            }
        }
        if (!std::isfinite(best_val)) {
            throw config_error("tradeoff_curve: no feasible point for a budget");
        }
        return TradeoffPoint{best_thr, rho_pair(params, best_thr)};
    };

    // Solve in ascending budget order so the curve can be made monotone: the
    // feasible sets nest, so a solution for a smaller budget stays valid.
    std::vector<size_t> idx(budgets.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return budgets[a] < budgets[b]; });
    std::vector<TradeoffPoint> out(budgets.size());
    std::optional<TradeoffPoint> prev;
    for (size_t r : idx) {
        TradeoffPoint p = solve_budget(budgets[r]);
        if (prev && prev->exponents.rho_q < p.exponents.rho_q &&
            prev->exponents.rho_u <= budgets[r] + 1e-9) {
            p = *prev;
        }
        out[r] = p;
        prev = p;
    }
    return out;
}

TradeoffPoint subset_closed_form(const GapParams& params, double alpha) {
    params.validate();
    const double wq = params.w_q, wu = params.w_u;
    if (std::fabs(wq - wu) < 1e-12) {
        throw config_error("subset_closed_form: degenerate at w_q == w_u");
    }
    if (std::fabs(params.w_2 - wq * wu) > 1e-9 ||
        std::fabs(params.w_1 - std::min(wq, wu)) > 1e-9) {
        throw std::invalid_argument(
            "subset_closed_form: requires w_1 = min(w_q,w_u) and w_2 = w_q*w_u");
    }
    double lo = params.w_1 - wq * wu;
    double hi = std::max(wq, wu) - wq * wu;
    if (alpha < lo - 1e-12 || alpha > hi + 1e-12) {
        throw std::out_of_range("subset_closed_form: alpha outside its range");
    }
    alpha = std::clamp(alpha, lo, hi);

    double t_q, t_u;
    if (wq > wu) {  // w_1 = w_u
        t_q = (wq * (1.0 - wu) - alpha) / (wq - wu);
        t_u = (wq * (1.0 - wq) * wu * (1.0 - wu) / alpha - wu * (1.0 - wq)) / (wq - wu);
    } else {  // w_1 = w_q
        t_u = (wu * (1.0 - wq) - alpha) / (wu - wq);
        t_q = (wq * (1.0 - wq) * wu * (1.0 - wu) / alpha - wq * (1.0 - wu)) / (wu - wq);
    }
    t_q = std::clamp(t_q, 0.0, 1.0);
    t_u = std::clamp(t_u, 0.0, 1.0);
    Thresholds thr{t_q, t_u};

    bool interior = t_q > 1e-9 && t_q < 1.0 - 1e-9 && t_u > 1e-9 && t_u < 1.0 - 1e-9;
    if (!interior) {
        return TradeoffPoint{thr, rho_pair(params, thr)};
    }
    double d_u = kl_binary(t_u, wu);
    ExponentPair e;
    if (wq > wu) {
        e.rho_q = (t_q * std::log((1.0 - t_u) / (1.0 - wu)) -
                   t_u * std::log((1.0 - t_q) / (1.0 - wq))) /
                  d_u;
        e.rho_u = ((1.0 - t_u) * std::log(t_q / wq) - (1.0 - t_q) * std::log(t_u / wu)) / d_u;
    } else {
        e.rho_q = ((1.0 - t_q) * std::log(t_u / wu) - (1.0 - t_u) * std::log(t_q / wq)) / d_u;
        e.rho_u = (t_u * std::log((1.0 - t_q) / (1.0 - wq)) -
                   t_q * std::log((1.0 - t_u) / (1.0 - wu))) /
                  d_u;
    }
    return TradeoffPoint{thr, e};
}

double lower_bound_symmetric(double w, double w_1, double w_2) {
    if (!(0.0 < w && w < 1.0 && w * w < w_1 && w_1 < w && w_2 < w_1)) {
        throw std::domain_error("lower_bound_symmetric: need 0 < w^2 < w_1 < w < 1, w_2 < w_1");
    }
    if (w_2 < w * w) {
        throw std::domain_error("lower_bound_symmetric: w_2 below w^2");
    }
    if (w_2 <= w * w) return 0.0;
    double num = std::log((w_1 - w * w) / (w * (1.0 - w)));
    double den = std::log((w_2 - w * w) / (w * (1.0 - w)));
    return std::max(0.0, num / den);
}

LowerBoundPoint lower_bound_random(const GapParams& params, double alpha) {
    params.validate();
    if (!params.random_instance(1e-9)) {
        throw std::invalid_argument("lower_bound_random: requires w_2 = w_q*w_u");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("lower_bound_random: alpha outside [0,1]");
    }
    JointDistribution p = joint_from_marginals(params.w_q, params.w_u, params.w_1);
    auto objective = [&](double t_q, double t_u) {
        if (t_q <= 0.0 || t_q >= 1.0 || t_u <= 0.0 || t_u >= 1.0) return kInf;
        double d_u = kl_binary(t_u, params.w_u);
        if (d_u < 1e-11) return kInf;  // excluded line t_u = w_u
        try {
            InnerOptimum inner = optimize_inner(t_q, t_u, p);
            double d_q = kl_binary(t_q, params.w_q);
            return (inner.divergence - alpha * d_q - (1.0 - alpha) * d_u) / d_u;
        } catch (const std::exception&) {
            return kInf;
        }
    };

    const int grid = 96;
    double best = kInf;
    double bq = 0.5, bu = 0.5;
    std::vector<std::pair<double, std::pair<double, double>>> ranked;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            double t_q = 0.002 + (0.996 * i) / (grid - 1);
            double t_u = 0.002 + (0.996 * j) / (grid - 1);
            double v = objective(t_q, t_u);
            if (std::isfinite(v)) ranked.push_back({v, {t_q, t_u}});
        }
    }
    // The matching extremes of the trade-off are explicit candidates.
    for (Side side : {Side::query, Side::update}) {
        try {
            Thresholds t = endpoint_thresholds(params, side);
            double v = objective(t.t_q, t.t_u);
            if (std::isfinite(v)) ranked.push_back({v, {t.t_q, t.t_u}});
        } catch (const std::exception&) {
        }
    }
    ranked.push_back({objective(1.0 - params.w_u, 1.0 - params.w_q),
                      {1.0 - params.w_u, 1.0 - params.w_q}});
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (size_t s = 0; s < std::min<size_t>(4, ranked.size()); ++s) {
        double t_q = ranked[s].second.first, t_u = ranked[s].second.second;
        for (int round = 0; round < 5; ++round) {
            t_q = golden_min([&](double x) { return objective(x, t_u); },
                             std::max(1e-4, t_q - 0.05), std::min(1.0 - 1e-4, t_q + 0.05));
            t_u = golden_min([&](double x) { return objective(t_q, x); },
                             std::max(1e-4, t_u - 0.05), std::min(1.0 - 1e-4, t_u + 0.05));
        }
        double v = objective(t_q, t_u);
        if (v < best) {
            best = v;
            bq = t_q;
            bu = t_u;
        }
        if (ranked[s].first < best) {
            best = ranked[s].first;
            bq = ranked[s].second.first;
            bu = ranked[s].second.second;
        }
    }
    return LowerBoundPoint{best, Thresholds{bq, bu}};
}

EmbeddingResult spherical_embedding(const GapParams& params) {
    params.validate();
    double denom = std::sqrt(params.w_q * (1.0 - params.w_q) * params.w_u * (1.0 - params.w_u));
    return EmbeddingResult{(params.w_1 - params.w_q * params.w_u) / denom,
                           (params.w_2 - params.w_q * params.w_u) / denom};
}

ExponentPair spherical_tradeoff(double alpha, double beta, double lambda) {
    if (!(beta > -1.0 && alpha < 1.0 && beta < alpha)) {
        throw std::domain_error("spherical_tradeoff: requires -1 < beta < alpha < 1");
    }
    if (alpha <= 0.0 && lambda != 0.0) {
        throw std::domain_error("spherical_tradeoff: alpha must be positive off lambda = 0");
    }
    auto rho_at = [&](double l) {
        double a_hi = std::pow(alpha, 1.0 + l);
        double a_lo = std::pow(alpha, l);
        double num = (1.0 - a_hi) * (1.0 - a_hi) / (1.0 - alpha * alpha);
        double den = (1.0 - beta * beta) / ((1.0 - a_lo * beta) * (1.0 - a_lo * beta));
        return num * den;
    };
    return ExponentPair{rho_at(lambda), rho_at(-lambda)};
}

double minhash_family_rho(const GapParams& params, double bucket_index) {
    params.validate();
    if (!(bucket_index >= 0.0)) {
        throw std::invalid_argument("minhash_family_rho: bucket index must be >= 0");
    }
    const double wq = params.w_q, wu = params.w_u;
    auto log_num = [&](double w_level, double i) {
        double covered = 1.0 - wq - wu + w_level;
        if (covered <= 0.0 && i > 0.0) return -kInf;
        double present = std::log(w_level) + (i > 0.0 ? i * std::log(covered) : 0.0);
        double denom = std::max(i * std::log1p(-wq) + std::log(wq),
                                i * std::log1p(-wu) + std::log(wu));
        return present - denom;
    };
    double num, den;
    if (std::isinf(bucket_index)) {
        double m = std::max(1.0 - wq, 1.0 - wu);
        num = std::log((1.0 - wq - wu + params.w_1) / m);
        den = std::log((1.0 - wq - wu + params.w_2) / m);
    } else {
        num = log_num(params.w_1, bucket_index);
        den = log_num(params.w_2, bucket_index);
    }
    if (!std::isfinite(num) || !std::isfinite(den) || den >= -1e-15) return kNaN;
    return num / den;
}

DominatingFilter minhash_dominating(const GapParams& params) {
    params.validate();
    std::vector<double> candidates{0.0, kInf};
    if (std::fabs(params.w_q - params.w_u) > 1e-12) {
        // Index where the two symmetrization denominators balance:
        // (1-w_q)^i w_q = (1-w_u)^i w_u.
        double i_bal = std::log(params.w_u / params.w_q) /
                       std::log((1.0 - params.w_q) / (1.0 - params.w_u));
        if (std::isfinite(i_bal) && i_bal > 0.0) candidates.push_back(i_bal);
    }
    DominatingFilter best{0.0, kInf};
    for (double i : candidates) {
        double r = minhash_family_rho(params, i);
        if (std::isfinite(r) && r < best.rho) best = {i, r};
    }
    if (!std::isfinite(best.rho)) throw config_error("minhash_dominating: no defined candidate");
    return best;
}

BaselineRhos baseline_rhos(const GapParams& params) {
    params.validate();
    BaselineRhos out{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
    const double wq = params.w_q, wu = params.w_u, w1 = params.w_1, w2 = params.w_2;

    try {
        out.supermajority = balanced_point(params).exponents.rho_q;
    } catch (const std::exception&) {
    }

    {
        double a = w1 / (wq + wu - w1), b = w2 / (wq + wu - w2);
        if (a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) out.minhash = std::log(a) / std::log(b);
    }
    {
        double m = std::max(wq, wu);
        double a = w1 / m, b = w2 / m;
        if (a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) out.chosen_path = std::log(a) / std::log(b);
    }
    EmbeddingResult emb = spherical_embedding(params);
    if (emb.alpha > -1.0 && emb.alpha < 1.0 && emb.beta > -1.0 && emb.beta < 1.0) {
        double fa = 1.0 - std::acos(emb.alpha) / M_PI;
        double fb = 1.0 - std::acos(emb.beta) / M_PI;
        if (fa > 0.0 && fb > 0.0 && fb < 1.0) out.simhash = std::log(fa) / std::log(fb);
        out.spherical_lsf =
            (1.0 - emb.alpha) / (1.0 + emb.alpha) * (1.0 + emb.beta) / (1.0 - emb.beta);
    }
    {
        double a = 1.0 - wq - wu + 2.0 * w1, b = 1.0 - wq - wu + 2.0 * w2;
        if (a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) out.bit_sampling = std::log(a) / std::log(b);
    }
    return out;
}

ShiftGridResult embedding_grid_check(const GapParams& params, double step) {
    params.validate();
    if (!(step > 0.0)) throw std::invalid_argument("embedding_grid_check: step must be positive");
    auto cosine = [&](double a, double b, double w_level) {
        double num = w_level + params.w_q * b + params.w_u * a + a * b;
        double na = params.w_q * (1.0 + a) * (1.0 + a) + (1.0 - params.w_q) * a * a;
        double nb = params.w_u * (1.0 + b) * (1.0 + b) + (1.0 - params.w_u) * b * b;
        if (na <= 0.0 || nb <= 0.0) return kNaN;
        return std::clamp(num / std::sqrt(na * nb), -1.0, 1.0);
    };
    ShiftGridResult r{0, 0, kInf, 0, 0, kInf};
    int steps = static_cast<int>(std::floor((0.5 - (-1.0)) / step + 1e-9));
    for (int i = 0; i <= steps; ++i) {
        double a = -1.0 + i * step;
        for (int j = 0; j <= steps; ++j) {
            double b = -1.0 + j * step;
            double al = cosine(a, b, params.w_1);
            double be = cosine(a, b, params.w_2);
            if (!std::isfinite(al) || !std::isfinite(be)) continue;
            if (al >= 1.0 - 1e-12 || be <= -1.0 + 1e-12) continue;
            double sp = ((1.0 - al) / (1.0 + al)) * ((1.0 + be) / (1.0 - be));
            if (std::isfinite(sp) && sp < r.rho_sp) {
                r.rho_sp = sp;
                r.a_sp = a;
                r.b_sp = b;
            }
            double fa = -std::log(1.0 - std::acos(al) / M_PI);
            double fb = -std::log(1.0 - std::acos(be) / M_PI);
            if (fa >= 0.0 && fb > 0.0) {
                double hp = fa / fb;
                if (std::isfinite(hp) && hp < r.rho_hp) {
                    r.rho_hp = hp;
                    r.a_hp = a;
                    r.b_hp = b;
                }
            }
        }
    }
    return r;
}

ThresholdIdentity optimal_threshold_identity_check(double w, double w_1) {
    if (!(0.0 < w && w < 1.0 && w * w < w_1 + 1e-15 && w_1 <= w)) {
        throw std::domain_error("optimal_threshold_identity_check: need w^2 < w_1 <= w");
    }
    double rho = (w_1 - w * w) / (w * (1.0 - w));
    double tau = (1.0 - w) / w;
    double lhs = tau * (rho + 1.0 / tau) / (rho + tau);
    double rhs = w_1 * (1.0 - w) / (w * (w_1 - 2.0 * w + 1.0));
    ThresholdIdentity out;
    out.residual = std::fabs(lhs - rhs);
    double log_tau = std::log(tau);
    double log_ratio = std::log((rho + tau) / (rho + 1.0 / tau));
    out.r = std::fabs(log_ratio) < 1e-14 ? rho + 1.0 : 2.0 * log_tau / log_ratio;
    return out;
}

}  // namespace smj
