#include "smj/oracle.hpp"

#include "smj/parallel.hpp"
#include "smj/rng.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace smj {

void WalkLaw::validate() const {
    if (!(p >= 0.0 && p1 >= 0.0 && p2 >= 0.0 && p1 <= 1.0 && p2 <= 1.0)) {
        throw std::invalid_argument("WalkLaw: probabilities outside [0,1]");
    }
    if (p1 - p < -1e-12 || p2 - p < -1e-12 || 1.0 - p1 - p2 + p < -1e-12) {
        throw std::invalid_argument("WalkLaw: negative matrix entry");
    }
    if (p < p1 * p2 - 1e-12) {
        throw std::invalid_argument("WalkLaw: coordinates must be positively correlated");
    }
}

namespace {

bool near_integer(double x) { return std::fabs(x - std::llround(x)) <= 1e-9; }

long double lchoose4(uint64_t n, uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    return std::lgammal(static_cast<long double>(n) + 1) -
           std::lgammal(static_cast<long double>(a) + 1) -
           std::lgammal(static_cast<long double>(b) + 1) -
           std::lgammal(static_cast<long double>(c) + 1) -
           std::lgammal(static_cast<long double>(d) + 1);
}

}  // namespace

long double quadrant_exact(uint32_t k, const WalkLaw& law) {
    law.validate();
    if (k == 0) throw std::invalid_argument("quadrant_exact: k must be positive");
    if (!near_integer(law.p1 * k) || !near_integer(law.p2 * k)) {
        throw std::invalid_argument("quadrant_exact: p1*k and p2*k must be integers");
    }
    const long double s11 = law.p;
    const long double s10 = law.p1 - law.p;
    const long double s01 = law.p2 - law.p;
    const long double s00 = 1.0L - law.p1 - law.p2 + law.p;

    // f[c1][c2] = probability of counts (c1, c2) after l steps with every
    // prefix below the mean line in both coordinates.
    const uint32_t dim = k + 1;
    std::vector<long double> f(static_cast<size_t>(dim) * dim, 0.0L), g(f.size());
    f[0] = 1.0L;
    for (uint32_t l = 1; l <= k; ++l) {
        std::fill(g.begin(), g.end(), 0.0L);
        // ceilings floor(p*l + eps); counts above them die
        auto cap1 = static_cast<uint32_t>(std::floor(law.p1 * l + 1e-9));
        auto cap2 = static_cast<uint32_t>(std::floor(law.p2 * l + 1e-9));
        for (uint32_t c1 = 0; c1 < l; ++c1) {
            for (uint32_t c2 = 0; c2 < l; ++c2) {
                long double mass = f[c1 * dim + c2];
                if (mass == 0.0L) continue;
                if (c1 <= cap1 && c2 <= cap2) g[c1 * dim + c2] += mass * s00;
                if (c1 + 1 <= cap1 && c2 <= cap2) g[(c1 + 1) * dim + c2] += mass * s10;
                if (c1 <= cap1 && c2 + 1 <= cap2) g[c1 * dim + c2 + 1] += mass * s01;
                if (c1 + 1 <= cap1 && c2 + 1 <= cap2) g[(c1 + 1) * dim + c2 + 1] += mass * s11;
            }
        }
        f.swap(g);
    }
    long double total = 0.0L;
    for (long double v : f) total += v;
    return total;
}

long double point_mass_exact(uint32_t k, const WalkLaw& law) {
    law.validate();
    if (k == 0) throw std::invalid_argument("point_mass_exact: k must be positive");
    if (!near_integer(law.p1 * k) || !near_integer(law.p2 * k)) {
        throw std::invalid_argument("point_mass_exact: p1*k and p2*k must be integers");
    }
    const auto n1 = static_cast<uint64_t>(std::llround(law.p1 * k));
    const auto n2 = static_cast<uint64_t>(std::llround(law.p2 * k));
    const auto a = static_cast<uint64_t>(std::ceil(law.p * k - 1e-9));
    if (a > n1 || a > n2 || n1 + n2 > k + a) {
        throw std::invalid_argument("point_mass_exact: infeasible counts");
    }
    const uint64_t b = n1 - a, c = n2 - a, d = k - n1 - n2 + a;
    const long double probs[4] = {law.p, law.p1 - law.p, law.p2 - law.p,
                                  1.0L - law.p1 - law.p2 + law.p};
    const uint64_t counts[4] = {a, b, c, d};
    long double log_term = lchoose4(k, a, b, c, d);
    for (int i = 0; i < 4; ++i) {
        if (counts[i] == 0) continue;
        if (probs[i] <= 0.0L) return 0.0L;
        log_term += counts[i] * std::log(probs[i]);
    }
    return std::exp(log_term);
}

namespace {

// Distinct arrangements of the fixed step multiset whose every prefix stays
// on or above the integer mean line: c1*k >= P1*l and c2*k >= P2*l.
struct ArrangementCounter {
    uint32_t k;
    uint64_t P1, P2;  // p1*k, p2*k
    uint64_t good = 0, total = 0;

    void run(uint64_t rem[4], uint32_t l, uint64_t c1, uint64_t c2, uint64_t ways) {
        if (l == k) {
            total += ways;
            good += ways;
            return;
        }
        // Prefix feasibility is checked after each appended step below.
        static constexpr int dx[4] = {1, 1, 0, 0};
        static constexpr int dy[4] = {1, 0, 1, 0};
        for (int s = 0; s < 4; ++s) {
            if (rem[s] == 0) continue;
            uint64_t nc1 = c1 + dx[s], nc2 = c2 + dy[s];
            uint64_t nl = l + 1;
            rem[s]--;
            if (nc1 * k >= P1 * nl && nc2 * k >= P2 * nl) {
                run(rem, nl, nc1, nc2, ways);
            } else {
                total += count_remaining(rem, ways);
            }
            rem[s]++;
        }
    }

    // Multinomial count of all completions of a dead prefix.
    uint64_t count_remaining(const uint64_t rem[4], uint64_t ways) const {
        long double lg = std::lgammal(static_cast<long double>(rem[0] + rem[1] + rem[2] + rem[3]) + 1);
        for (int i = 0; i < 4; ++i) lg -= std::lgammal(static_cast<long double>(rem[i]) + 1);
        return ways * static_cast<uint64_t>(std::llroundl(std::exp(lg)));
    }
};

}  // namespace

long double rearrangement_exact(uint32_t k, const WalkLaw& law) {
    law.validate();
    if (k == 0) throw std::invalid_argument("rearrangement_exact: k must be positive");
    if (k > 12) throw std::invalid_argument("rearrangement_exact: k > 12 is infeasible");
    if (!near_integer(law.p * k) || !near_integer(law.p1 * k) || !near_integer(law.p2 * k)) {
        throw std::invalid_argument("rearrangement_exact: p*k, p1*k, p2*k must be integers");
    }
    const auto a = static_cast<uint64_t>(std::llround(law.p * k));
    const auto n1 = static_cast<uint64_t>(std::llround(law.p1 * k));
    const auto n2 = static_cast<uint64_t>(std::llround(law.p2 * k));
    uint64_t rem[4] = {a, n1 - a, n2 - a, k - n1 - n2 + a};
    ArrangementCounter counter{k, n1, n2};
    counter.run(rem, 0, 0, 0, 1);
    if (counter.total == 0) return 0.0L;
    return static_cast<long double>(counter.good) / counter.total;
}

namespace {

struct PairSample {
    std::vector<uint32_t> x, y;
};

PairSample draw_pair(Rng& rng, uint64_t q, uint64_t sx, uint64_t sy, uint64_t shared) {
    PairSample s;
    s.x = rng.sorted_subset(q, sx);
    std::vector<uint32_t> inter = rng.sorted_subset_of(s.x, shared);
    std::vector<uint32_t> outside;
    outside.reserve(q - sx);
    size_t xi = 0;
    for (uint32_t e = 0; e < q; ++e) {
        if (xi < s.x.size() && s.x[xi] == e) {
            ++xi;
        } else {
            outside.push_back(e);
        }
    }
    std::vector<uint32_t> fill = rng.sorted_subset_of(outside, sy - shared);
    s.y = std::move(inter);
    s.y.insert(s.y.end(), fill.begin(), fill.end());
    std::sort(s.y.begin(), s.y.end());
    return s;
}

uint64_t shared_paths(const std::vector<DecodedPath>& a, const std::vector<DecodedPath>& b) {
    std::unordered_set<uint64_t> keys;
    keys.reserve(a.size() * 2);
    auto fp = [](const std::vector<uint32_t>& elements) {
        uint64_t h = 0x5eedull;
        for (uint32_t e : elements) h = mix64(h ^ (e + 0x9e3779b97f4a7c15ull));
        return h;
    };
    for (const auto& p : a) keys.insert(fp(p.elements));
    uint64_t count = 0;
    for (const auto& p : b) count += keys.count(fp(p.elements));
    return count;
}

// Marginal divergence of a side, mapped through the complement when the
// side's supermajority runs downward.
double side_divergence(double t, double w, Direction dir) {
    if (dir == Direction::at_most) return kl_binary(1.0 - t, 1.0 - w);
    return kl_binary(t, w);
}

// Joint divergence D(T||P) at the config thresholds against the overlap
// level w_pair, with per-side complement flips applied to both T and P.
double pair_divergence(const TreeConfig& cfg, double wq, double wu, double w_pair) {
    double tq = cfg.thresholds.t_q, tu = cfg.thresholds.t_u;
    double m11 = w_pair, m12 = wq - w_pair, m21 = wu - w_pair, m22 = 1.0 - wq - wu + w_pair;
    if (cfg.dir_q == Direction::at_most) {
        std::swap(m11, m21);
        std::swap(m12, m22);
        tq = 1.0 - tq;
        wq = 1.0 - wq;
    }
    if (cfg.dir_u == Direction::at_most) {
        std::swap(m11, m12);
        std::swap(m21, m22);
        tu = 1.0 - tu;
        wu = 1.0 - wu;
    }
    JointDistribution p{m11, m12, m21, m22};
    return optimize_inner(tq, tu, p).divergence;
}

}  // namespace

MomentEstimate mc_filter_moments(const TreeConfig& config, const GapParams& params,
                                 PairRelation relation, uint64_t trials, uint64_t seed) {
    config.validate();
    params.validate();
    if (trials < 1000) throw std::invalid_argument("mc_filter_moments: need at least 10^3 trials");

    const uint64_t q = config.universe_prime;
    const auto sq = static_cast<uint64_t>(std::llround(params.w_q * q));
    const auto su = static_cast<uint64_t>(std::llround(params.w_u * q));
    const auto s1 = static_cast<uint64_t>(std::llround(params.w_1 * q));
    const auto s2 = static_cast<uint64_t>(std::llround(params.w_2 * q));
    const double wq_eff = static_cast<double>(sq) / q;
    const double wu_eff = static_cast<double>(su) / q;
    const uint32_t K = config.half_depth;
    const double tq = config.thresholds.t_q, tu = config.thresholds.t_u;

    std::vector<double> values(trials, 0.0);
    parallel_for(trials, [&](uint64_t trial) {
        TreeConfig fresh = config;
        fresh.master_seed = derive(derive(seed, 0x0a71), trial);
        Rng rng(derive(derive(seed, 0x5e75), trial));
        switch (relation) {
            case PairRelation::single_query: {
                auto x = rng.sorted_subset(q, sq);
                values[trial] = static_cast<double>(
                    decode(fresh, 0, 1, x, tq, Side::query).size());
                break;
            }
            case PairRelation::single_update: {
                auto y = rng.sorted_subset(q, su);
                values[trial] = static_cast<double>(
                    decode(fresh, 0, 1, y, tu, Side::update).size());
                break;
            }
            case PairRelation::far:
            case PairRelation::close: {
                uint64_t shared = relation == PairRelation::far ? s2 : s1;
                PairSample pair = draw_pair(rng, q, sq, su, shared);
                auto rx = decode(fresh, 0, 1, pair.x, tq, Side::query);
                auto ry = decode(fresh, 0, 1, pair.y, tu, Side::update);
                uint64_t common = shared_paths(rx, ry);
                values[trial] = relation == PairRelation::far
                                    ? static_cast<double>(common)
                                    : (common >= 1 ? 1.0 : 0.0);
                break;
            }
        }
    });

    MomentEstimate est;
    est.trials = trials;
    double sum = 0.0, sum_sq = 0.0;
    for (double v : values) {
        sum += v;
        sum_sq += v * v;
    }
    est.mean = sum / static_cast<double>(trials);
    double variance = std::max(0.0, sum_sq / static_cast<double>(trials) - est.mean * est.mean);
    est.std_error = std::sqrt(variance / static_cast<double>(trials));

    const double log_delta_k = K * std::log(config.delta_target);
    switch (relation) {
        case PairRelation::single_query:
            est.bound = 2.0 * std::exp(log_delta_k -
                                       K * side_divergence(tq, wq_eff, config.dir_q));
            est.upper_bound = true;
            break;
        case PairRelation::single_update:
            est.bound = 2.0 * std::exp(log_delta_k -
                                       K * side_divergence(tu, wu_eff, config.dir_u));
            est.upper_bound = true;
            break;
        case PairRelation::far: {
            double div = pair_divergence(config, wq_eff, wu_eff, static_cast<double>(s2) / q);
            est.bound = 2.0 * std::exp(log_delta_k - K * div);
            est.upper_bound = true;
            break;
        }
        case PairRelation::close: {
            double div = pair_divergence(config, wq_eff, wu_eff, static_cast<double>(s1) / q);
            est.bound = std::pow(7.0, -8.0) * std::pow(static_cast<double>(K), -14.0) *
                        std::exp(log_delta_k - K * div);
            est.upper_bound = false;
            break;
        }
    }
    est.pass = est.upper_bound ? est.mean <= est.bound + 3.0 * est.std_error
                               : est.mean >= est.bound - 3.0 * est.std_error;
    return est;
}

}  // namespace smj
