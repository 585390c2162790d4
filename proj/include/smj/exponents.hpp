#pragma once

#include "smj/divergence.hpp"

#include <cstdint>
#include <vector>

namespace smj {

/// Query-time and space/update exponents: query time n^rho_q, space n^(1+rho_u).
struct ExponentPair {
    double rho_q;
    double rho_u;
};

struct TradeoffPoint {
    Thresholds thresholds;
    ExponentPair exponents;
};

enum class Side { query, update };

/// Everything rho_pair computes along the way; tests and the planner reuse it.
struct RhoBreakdown {
    double t1_close, t1_far;       ///< inner-cell optima against P_1 and P_2
    double div_close, div_far;     ///< D(T_1||P_1), D(T_2||P_2)
    double d_q, d_u;               ///< marginal divergences d(t_q||w_q), d(t_u||w_u)
    ExponentPair exponents;
};

/// Exponents at the given thresholds:
///   rho_q = (D(T_1||P_1) - d(t_q||w_q)) / (D(T_2||P_2) - d(t_q||w_q)),
///   rho_u the same with d(t_u||w_u) in the numerator.
/// Throws config_error when the denominator is nonpositive (no gap).
RhoBreakdown rho_breakdown(const GapParams& params, const Thresholds& thr);
ExponentPair rho_pair(const GapParams& params, const Thresholds& thr);

/// Smallest even k >= ln(n) / (D(T_2||P_2) - d(t_q||w_q)); at least 2.
uint32_t tree_depth(uint64_t n, const GapParams& params, const Thresholds& thr);

/// For each rho_u budget, thresholds minimizing rho_q subject to rho_u <= budget.
/// Coarse grid over (t_q,t_u), multi-start golden-section refinement, plus the
/// closed-form endpoint candidates. The returned curve is non-increasing in
/// rho_q as the budget grows.
std::vector<TradeoffPoint> tradeoff_curve(const GapParams& params,
                                          const std::vector<double>& budgets);

/// Balanced exponent at thresholds (1-w, 1-w) for w_q = w_u = w:
///   log((w1/w)(1-w)/(1-2w+w1)) / log((w2/w)(1-w)/(1-2w+w2)).
double balanced_closed_form(double w, double w_1, double w_2);

/// Best balanced point: minimum of rho (= rho_q = rho_u) over the curve
/// d(t_q||w_q) = d(t_u||w_u), where the two exponents coincide.
TradeoffPoint balanced_point(const GapParams& params);

/// Optimal trade-off family for subset/superset instances
/// (w_1 = min(w_q,w_u), w_2 = w_q*w_u), parametrized by
/// alpha in [w_1 - w_q w_u, max(w_q,w_u) - w_q w_u].
/// Throws config_error when w_q == w_u (the family degenerates) and
/// std::out_of_range for alpha outside the range.
TradeoffPoint subset_closed_form(const GapParams& params, double alpha);

/// Thresholds making D(T_1||P_1) equal the chosen side's marginal divergence,
/// so that rho_q = 0 (query side) or rho_u = 0 (update side); among those, the
/// other exponent is minimized. Requires w_1 > w_q*w_u strictly.
Thresholds endpoint_thresholds(const GapParams& params, Side side);

/// log((w1-w^2)/(w(1-w))) / log((w2-w^2)/(w(1-w))); 0 when w_2 == w^2.
/// Throws std::domain_error when w_2 < w^2 or the ordering is invalid.
double lower_bound_symmetric(double w, double w_1, double w_2);

struct LowerBoundPoint {
    double value;
    Thresholds thresholds;  ///< achieving (t_q, t_u)
};

/// Numeric infimum over (t_q,t_u), t_u != w_u, of
///   alpha (D(T||P)-d(t_q||w_q))/d(t_u||w_u) + (1-alpha)(D(T||P)-d(t_u||w_u))/d(t_u||w_u)
/// with P the close-pair matrix. Requires w_2 == w_q*w_u.
LowerBoundPoint lower_bound_random(const GapParams& params, double alpha);

/// Cosine similarities of the optimally shifted spherical embedding:
/// alpha = (w1 - w_q w_u)/sqrt(w_q(1-w_q) w_u(1-w_u)), beta likewise with w2.
struct EmbeddingResult {
    double alpha;
    double beta;
};
EmbeddingResult spherical_embedding(const GapParams& params);

/// Balanced exponents of the standard methods. Entries whose formula leaves
/// its domain are NaN ("undefined"), never clamped.
struct BaselineRhos {
    double supermajority;
    double minhash;
    double chosen_path;
    double simhash;
    double spherical_lsf;
    double bit_sampling;
};
BaselineRhos baseline_rhos(const GapParams& params);

/// Spherical LSF space/time trade-off at similarities (alpha, beta),
/// lambda in [-1,1]:
///   rho_q = (1-alpha^(1+lambda))^2/(1-alpha^2) * (1-beta^2)/(1-alpha^lambda beta)^2
/// and rho_u the same expression at -lambda.
ExponentPair spherical_tradeoff(double alpha, double beta, double lambda);

/// Exponent of the symmetrized keep-only-bucket-i MinHash filter family:
///   rho_i = log((1-wq-wu+w1)^i w1 / max((1-wq)^i wq, (1-wu)^i wu)) / (same with w2).
/// bucket_index may be any real >= 0, including +infinity (complemented sets).
double minhash_family_rho(const GapParams& params, double bucket_index);

struct DominatingFilter {
    double bucket_index;  ///< 0, +infinity, or the balancing index
    double rho;
};

/// Best of the three candidate bucket indices; never worse than MinHash.
DominatingFilter minhash_dominating(const GapParams& params);

/// Grid minimizers over affine shifts (a, b) in [-1, 0.5]^2 of the spherical
/// and hyperplane exponents of the shifted embedding. The optimum sits at
/// (-w_q, -w_u).
struct ShiftGridResult {
    double a_sp, b_sp, rho_sp;
    double a_hp, b_hp, rho_hp;
};
ShiftGridResult embedding_grid_check(const GapParams& params, double step);

/// Residual of the optimal-threshold identity at (t_q,t_u) = (1-w, 1-w) for
/// the symmetric random instance, and the hypercontractive exponent
/// r = 2 log(tau) / log((rho+tau)/(rho+1/tau)) with rho = (w1-w^2)/(w(1-w)),
/// tau = (1-w)/w.
struct ThresholdIdentity {
    double residual;
    double r;
};
ThresholdIdentity optimal_threshold_identity_check(double w, double w_1);

}  // namespace smj
