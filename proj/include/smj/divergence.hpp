#pragma once

#include <stdexcept>

namespace smj {

/// Set-weight parameters of a gapped set-similarity instance: query density,
/// data density, close-pair and far-pair intersection densities.
struct GapParams {
    double w_q;
    double w_u;
    double w_1;
    double w_2;

    /// Throws std::invalid_argument unless 0 < w_2 < w_1 <= min(w_q,w_u) and
    /// max(w_q,w_u) < 1.
    void validate() const;

    /// True when w_1 >= w_q*w_u, the standing assumption for index planning.
    bool correlated() const { return w_1 >= w_q * w_u; }

    /// True when w_2 == w_q*w_u up to the given slack (the "random instance").
    bool random_instance(double tol = 1e-12) const;
};

/// Supermajority thresholds for the query and update side.
struct Thresholds {
    double t_q;
    double t_u;
};

/// A 2x2 probability matrix over the four membership events of a universe
/// element with respect to a (query, point) pair.
///
///     [ m11 m12 ]   row-one sum  = first marginal
///     [ m21 m22 ]   column-one sum = second marginal
struct JointDistribution {
    double m11, m12, m21, m22;

    double first_marginal() const { return m11 + m12; }
    double second_marginal() const { return m11 + m21; }

    /// All entries nonnegative and total mass 1 within absolute tolerance 1e-12.
    bool valid(double tol = 1e-12) const;
};

/// Binary KL divergence d(t||w) in nats, with the 0 log 0 = 0 convention.
/// Returns +infinity when t puts mass where w has none (t>0, w=0 or t<1, w=1).
/// Throws std::invalid_argument for t outside [0,1] or w outside [0,1].
double kl_binary(double t, double w);

/// KL divergence D(T||P) over the four cells, in nats. Returns +infinity if T
/// is not absolutely continuous with respect to P.
double kl_joint(const JointDistribution& T, const JointDistribution& P);

/// The matrix [[t1, tq-t1], [tu-t1, 1-tq-tu+t1]].
/// Throws std::out_of_range if t1 violates the Frechet bounds
/// max(0, tq+tu-1) <= t1 <= min(tq, tu).
JointDistribution joint_from_marginals(double t_q, double t_u, double t_1);

struct InnerOptimum {
    double t_1;         ///< argmin of t1 -> D(T(t1)||P)
    double divergence;  ///< the attained minimum
};

/// Minimizes D(T(t1)||P) over the feasible t1 interval intersected with the
/// absolute-continuity constraints forced by zero cells of P. The objective is
/// strictly convex, so sign bisection of its derivative converges; |t_1|
/// accurate to 1e-12.
/// Throws smj::infeasibility_error when no T << P with the given marginals exists.
InnerOptimum optimize_inner(double t_q, double t_u, const JointDistribution& P);

struct infeasibility_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Planning or configuration problem (no gap, degenerate thresholds, ...).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace smj
