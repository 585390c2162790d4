#include "smj/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace smj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void GapParams::validate() const {
    if (!(w_2 > 0.0) || !(w_1 > w_2)) {
        throw std::invalid_argument("GapParams: need 0 < w_2 < w_1");
    }
    if (!(w_1 <= std::min(w_q, w_u) + 1e-15)) {
        throw std::invalid_argument("GapParams: need w_1 <= min(w_q, w_u)");
    }
    if (!(std::max(w_q, w_u) < 1.0)) {
        throw std::invalid_argument("GapParams: need max(w_q, w_u) < 1");
    }
}

bool GapParams::random_instance(double tol) const {
    return std::fabs(w_2 - w_q * w_u) <= tol;
}

bool JointDistribution::valid(double tol) const {
    if (m11 < -tol || m12 < -tol || m21 < -tol || m22 < -tol) return false;
    return std::fabs(m11 + m12 + m21 + m22 - 1.0) <= tol;
}

double kl_binary(double t, double w) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("kl_binary: t outside [0,1]");
    if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("kl_binary: w outside [0,1]");
    double r = 0.0;
    if (t > 0.0) {
        if (w == 0.0) return kInf;
        r += t * std::log(t / w);
    }
    if (t < 1.0) {
        if (w == 1.0) return kInf;
        r += (1.0 - t) * std::log((1.0 - t) / (1.0 - w));
    }
    return std::max(r, 0.0);
}

double kl_joint(const JointDistribution& T, const JointDistribution& P) {
    const double t[4] = {T.m11, T.m12, T.m21, T.m22};
    const double p[4] = {P.m11, P.m12, P.m21, P.m22};
    double r = 0.0;
    for (int i = 0; i < 4; ++i) {
        if (t[i] > 0.0) {
            if (p[i] <= 0.0) return kInf;
            r += t[i] * std::log(t[i] / p[i]);
        }
    }
    return std::max(r, 0.0);
}

JointDistribution joint_from_marginals(double t_q, double t_u, double t_1) {
    double lo = std::max(0.0, t_q + t_u - 1.0);
    double hi = std::min(t_q, t_u);
    if (t_1 < lo - 1e-12 || t_1 > hi + 1e-12) {
        throw std::out_of_range("joint_from_marginals: t_1 outside the Frechet bounds");
    }
    t_1 = std::clamp(t_1, lo, hi);
    return JointDistribution{t_1, t_q - t_1, t_u - t_1, 1.0 - t_q - t_u + t_1};
}

namespace {

// Sign of the derivative of t1 -> D(T(t1)||P) at an interior point:
// log of the odds ratio of T minus log of the odds ratio of P.
double inner_derivative(double t_1, double t_q, double t_u, double log_odds_p) {
    double m11 = t_1;
    double m12 = t_q - t_1;
    double m21 = t_u - t_1;
    double m22 = 1.0 - t_q - t_u + t_1;
    if (m11 <= 0.0 || m22 <= 0.0) return -kInf;
    if (m12 <= 0.0 || m21 <= 0.0) return kInf;
    return std::log(m11) + std::log(m22) - std::log(m12) - std::log(m21) - log_odds_p;
}

}  // namespace

InnerOptimum optimize_inner(double t_q, double t_u, const JointDistribution& P) {
    if (!(t_q >= 0.0 && t_q <= 1.0 && t_u >= 0.0 && t_u <= 1.0)) {
        throw std::invalid_argument("optimize_inner: marginals outside [0,1]");
    }
    if (!P.valid(1e-9)) throw std::invalid_argument("optimize_inner: invalid P");

    double lo = std::max(0.0, t_q + t_u - 1.0);
    double hi = std::min(t_q, t_u);
    if (lo > hi + 1e-12) throw infeasibility_error("optimize_inner: empty Frechet interval");
    hi = std::max(hi, lo);

    // Zero cells of P pin the corresponding cell of T to zero.
    const double zero = 1e-15;
    bool forced = false;
    double forced_t1 = 0.0;
    auto force = [&](double v) {
        if (forced && std::fabs(v - forced_t1) > 1e-9) {
            throw infeasibility_error("optimize_inner: conflicting zero-cell constraints");
        }
        forced = true;
        forced_t1 = v;
    };
    if (P.m12 <= zero) force(t_q);
    if (P.m21 <= zero) force(t_u);
    if (P.m22 <= zero) force(t_q + t_u - 1.0);
    if (P.m11 <= zero) force(0.0);

    if (forced) {
        if (forced_t1 < lo - 1e-9 || forced_t1 > hi + 1e-9) {
            throw infeasibility_error("optimize_inner: no T << P with these marginals");
        }
        double t_1 = std::clamp(forced_t1, lo, hi);
        return {t_1, kl_joint(joint_from_marginals(t_q, t_u, t_1), P)};
    }

    if (hi - lo <= 1e-15) {
        return {lo, kl_joint(joint_from_marginals(t_q, t_u, lo), P)};
    }

    double log_odds_p =
        std::log(P.m11) + std::log(P.m22) - std::log(P.m12) - std::log(P.m21);

    // Derivative runs from -inf at lo to +inf at hi; bisect on its sign.
    double a = lo, b = hi;
    for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
        double m = 0.5 * (a + b);
        if (inner_derivative(m, t_q, t_u, log_odds_p) < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    double t_1 = 0.5 * (a + b);
    return {t_1, kl_joint(joint_from_marginals(t_q, t_u, t_1), P)};
}

}  // namespace smj
