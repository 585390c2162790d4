// smj: supermajority set-similarity search toolbox.
//
// Subcommands
//   analyze  exponent tables (trade-off curve, baselines, lower bounds) as CSV
//   gen      write a planted GapSS instance (binary GSS1, optional text export)
//   bench    plan, build and query an instance end to end; one CSV row
//   verify   exact lemma grids and Monte Carlo moment checks
//
// CSV goes to stdout, diagnostics to stderr. Exit status is 0 iff every
// requested check passed. SMJ_THREADS caps worker threads.

#include "smj/exponents.hpp"
#include "smj/index.hpp"
#include "smj/instance.hpp"
#include "smj/oracle.hpp"
#include "smj/rng.hpp"
#include "smj/tree.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

namespace {

using namespace smj;

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

std::string fmt(double v) {
    if (std::isnan(v)) return "undefined";
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
}

GapParams parse_params(const std::vector<double>& ws) {
    if (ws.size() != 4) throw CLI::ValidationError("--params needs wq,wu,w1,w2");
    GapParams p{ws[0], ws[1], ws[2], ws[3]};
    p.validate();
    return p;
}

int cmd_analyze(const GapParams& params, const std::vector<double>& budgets,
                const std::vector<std::string>& methods) {
    auto wanted = [&](const std::string& m) {
        return methods.empty() || std::find(methods.begin(), methods.end(), m) != methods.end();
    };
    std::cout << "method,t_q,t_u,rho_q,rho_u\n";
    auto row = [](const std::string& method, const std::string& tq, const std::string& tu,
                  double rq, double ru) {
        std::cout << csv_field(method) << ',' << tq << ',' << tu << ',' << fmt(rq) << ','
                  << fmt(ru) << '\n';
    };

    if (wanted("supermajority")) {
        TradeoffPoint bal = balanced_point(params);
        row("supermajority", fmt(bal.thresholds.t_q), fmt(bal.thresholds.t_u),
            bal.exponents.rho_q, bal.exponents.rho_u);
        std::vector<double> grid = budgets;
        if (grid.empty()) grid = {0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0,
                                  std::numeric_limits<double>::infinity()};
        auto curve = tradeoff_curve(params, grid);
        for (size_t i = 0; i < curve.size(); ++i) {
            std::ostringstream name;
            name << "supermajority_budget_" << fmt(grid[i]);
            row(name.str(), fmt(curve[i].thresholds.t_q), fmt(curve[i].thresholds.t_u),
                curve[i].exponents.rho_q, curve[i].exponents.rho_u);
        }
    }
    BaselineRhos base = baseline_rhos(params);
    if (wanted("minhash")) row("minhash", "", "", base.minhash, base.minhash);
    if (wanted("chosen_path")) row("chosen_path", "", "", base.chosen_path, base.chosen_path);
    if (wanted("simhash")) row("simhash", "", "", base.simhash, base.simhash);
    if (wanted("spherical_lsf")) row("spherical_lsf", "", "", base.spherical_lsf, base.spherical_lsf);
    if (wanted("bit_sampling")) row("bit_sampling", "", "", base.bit_sampling, base.bit_sampling);
    if (wanted("minhash_dominating")) {
        DominatingFilter dom = minhash_dominating(params);
        row("minhash_dominating_i_" + fmt(dom.bucket_index), "", "", dom.rho, dom.rho);
    }

    // Lower-bound rows, when the corresponding theorem applies.
    if (wanted("lower_bound_symmetric") && std::fabs(params.w_q - params.w_u) < 1e-12 &&
        params.w_2 > params.w_q * params.w_q) {
        double v = lower_bound_symmetric(params.w_q, params.w_1, params.w_2);
        row("lower_bound_symmetric", "", "", v, v);
    }
    if (wanted("lower_bound_random") && params.random_instance(1e-9)) {
        for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            LowerBoundPoint lb = lower_bound_random(params, alpha);
            std::ostringstream name;
            name << "lower_bound_random_alpha_" << fmt(alpha);
            row(name.str(), fmt(lb.thresholds.t_q), fmt(lb.thresholds.t_u), lb.value, lb.value);
        }
    }
    return 0;
}

int cmd_gen(const GapParams& params, uint64_t n, uint32_t d, uint64_t n_queries,
            uint64_t n_planted, uint64_t seed, const std::string& out,
            const std::string& text_out) {
    Instance inst = generate(n, d, params, n_queries, seed, n_planted);
    write_instance(inst, std::filesystem::path(out));
    std::cerr << "wrote " << out << " (n=" << inst.dataset.size()
              << ", queries=" << inst.queries.size() << ", planted=" << inst.planted.size()
              << ", q=" << inst.q << ")\n";
    if (!text_out.empty()) {
        write_text(inst, std::filesystem::path(text_out));
        std::cerr << "wrote " << text_out << " (text export)\n";
    }
    return 0;
}

int cmd_bench(const std::string& in, uint64_t seed, std::optional<uint32_t> reps,
              std::optional<double> tq, std::optional<double> tu, bool sampled_verify) {
    Instance inst = read_instance(std::filesystem::path(in));
    const GapParams& p = inst.params;

    Thresholds requested;
    if (tq && tu) {
        requested = Thresholds{*tq, *tu};
    } else {
        requested = balanced_point(p).thresholds;
    }
    PlanOptions options;
    options.reps_override = reps;
    TreeConfig config = plan(p, requested, std::max<uint64_t>(inst.dataset.size(), 2), inst.q,
                             seed, options);
    std::cerr << "plan: K=" << config.half_depth << " t_q=" << config.thresholds.t_q
              << " t_u=" << config.thresholds.t_u << " (requested " << requested.t_q << ","
              << requested.t_u << ") R=" << config.repetitions
              << " rho_q=" << config.planned_exponents.rho_q
              << " rho_u=" << config.planned_exponents.rho_u << "\n";

    auto dataset = std::make_shared<const Dataset>(inst.dataset);
    auto t0 = std::chrono::steady_clock::now();
    FilterIndex index = FilterIndex::build(config, dataset);
    double build_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ostringstream serialized;
    index.write(serialized);
    uint64_t index_bytes = serialized.str().size();

    // Planted-partner recall: verification threshold at the instance's
    // concentration ceiling, which only the planted point clears.
    double ln_n = std::log(static_cast<double>(std::max<size_t>(inst.dataset.size(), 2)));
    double w2q = p.w_2 * static_cast<double>(inst.q);
    QueryOptions qopt;
    qopt.overlap_threshold = w2q * (1.0 + 5.0 * std::sqrt(ln_n / w2q));
    qopt.sampled_verification = sampled_verify;
    qopt.verification_seed = derive(seed, 0xdead);

    uint64_t found = 0, planted_total = 0;
    double sum_candidates = 0, sum_verified = 0, sum_paths = 0, sum_micros = 0;
    std::vector<uint8_t> planted_query(inst.queries.size(), 0);
    std::vector<uint64_t> partner(inst.queries.size(), 0);
    for (const auto& [qi, pi] : inst.planted) {
        planted_query[qi] = 1;
        partner[qi] = pi;
    }
    for (size_t qi = 0; qi < inst.queries.size(); ++qi) {
        QueryReport r = index.query(inst.queries[qi], qopt);
        sum_candidates += static_cast<double>(r.candidates_examined);
        sum_verified += static_cast<double>(r.verified_comparisons);
        sum_paths += static_cast<double>(r.paths_decoded);
        sum_micros += r.wall_seconds * 1e6;
        if (planted_query[qi]) {
            ++planted_total;
            if (r.matched && *r.matched == partner[qi]) ++found;
        }
    }
    auto n_q = static_cast<double>(inst.queries.size());
    double recall = planted_total ? static_cast<double>(found) / planted_total : 0.0;

    std::cout << "n,d,w_q,w_u,w_1,w_2,t_q,t_u,K,R,recall,mean_candidates,mean_verified,"
                 "mean_paths,build_seconds,mean_query_micros,index_bytes\n";
    std::cout << inst.dataset.size() << ',' << inst.d << ',' << fmt(p.w_q) << ',' << fmt(p.w_u)
              << ',' << fmt(p.w_1) << ',' << fmt(p.w_2) << ',' << fmt(config.thresholds.t_q)
              << ',' << fmt(config.thresholds.t_u) << ',' << config.half_depth << ','
              << config.repetitions << ',' << fmt(recall) << ',' << fmt(sum_candidates / n_q)
              << ',' << fmt(sum_verified / n_q) << ',' << fmt(sum_paths / n_q) << ','
              << fmt(build_seconds) << ',' << fmt(sum_micros / n_q) << ',' << index_bytes
              << '\n';
    return 0;
}

int cmd_verify(const std::string& lemma, uint32_t kmax, uint64_t trials, uint64_t seed) {
    bool all = lemma == "all";
    bool pass = true;
    std::cout << "lemma,case,value,bound,verdict\n";
    auto report = [&](const std::string& name, const std::string& instance, double value,
                      double bound, bool ok) {
        pass = pass && ok;
        std::cout << name << ',' << csv_field(instance) << ',' << fmt(value) << ',' << fmt(bound)
                  << ',' << (ok ? "pass" : "FAIL") << '\n';
    };

    auto laws_for = [](uint32_t k) {
        std::vector<WalkLaw> laws;
        for (auto [p1, p2] : {std::pair{0.5, 0.5}, {0.25, 0.25}, {0.75, 0.75}, {0.25, 0.5},
                              {0.5, 0.75}, {0.25, 0.75}}) {
            if (std::fabs(p1 * k - std::llround(p1 * k)) > 1e-9) continue;
            if (std::fabs(p2 * k - std::llround(p2 * k)) > 1e-9) continue;
            laws.push_back(WalkLaw{std::min(p1, p2), p1, p2});          // maximal correlation
            laws.push_back(WalkLaw{p1 * p2, p1, p2});                   // independent boundary
            laws.push_back(WalkLaw{0.5 * (p1 * p2 + std::min(p1, p2)), p1, p2});
        }
        return laws;
    };

    if (all || lemma == "quadrant") {
        for (uint32_t k = 4; k <= kmax; k += 4) {
            double bound = 1.0 / (400.0 * std::pow(k, 6.5));
            int idx = 0;
            for (const WalkLaw& law : laws_for(k)) {
                auto value = static_cast<double>(quadrant_exact(k, law));
                std::ostringstream name;
                name << "k=" << k << " law#" << idx++;
                report("quadrant", name.str(), value, bound, value >= bound);
            }
        }
    }
    if (all || lemma == "pointmass") {
        for (uint32_t k = 2; k <= kmax; k += 2) {
            double bound = std::pow(k, -3.5) / 400.0;
            int idx = 0;
            for (const WalkLaw& law : laws_for(k)) {
                auto value = static_cast<double>(point_mass_exact(k, law));
                std::ostringstream name;
                name << "k=" << k << " law#" << idx++;
                report("pointmass", name.str(), value, bound, value >= bound);
            }
        }
    }
    if (all || lemma == "rearrangement") {
        for (uint32_t k = 2; k <= std::min(kmax, 8u); k += 2) {
            double bound = std::pow(k, -3.0);
            int idx = 0;
            for (WalkLaw law : laws_for(k)) {
                // the conditioning event needs p*k integral as well
                law.p = std::round(law.p * k) / k;
                if (law.p < law.p1 * law.p2) continue;
                auto value = static_cast<double>(rearrangement_exact(k, law));
                std::ostringstream name;
                name << "k=" << k << " law#" << idx++;
                report("rearrangement", name.str(), value, bound, value >= bound);
            }
        }
    }
    if (all || lemma == "moments") {
        GapParams params{0.2, 0.2, 0.1, 0.04};
        Thresholds thr{0.5, 0.5};
        for (uint32_t K : {4u, 6u, 8u}) {
            TreeConfig config = configure(params, thr, K, 1009, derive(seed, K), 1);
            for (PairRelation rel : {PairRelation::single_query, PairRelation::single_update,
                                     PairRelation::far}) {
                MomentEstimate est = mc_filter_moments(config, params, rel, trials,
                                                       derive(seed, 0x40 + K));
                std::ostringstream name;
                name << "K=" << K << ' '
                     << (rel == PairRelation::single_query
                             ? "q-bound"
                             : rel == PairRelation::single_update ? "u-bound" : "2-bound");
                report("moments", name.str(), est.mean, est.bound, est.pass);
            }
        }
    }
    if (all || lemma == "identity") {
        double max_residual = 0.0;
        Rng rng(derive(seed, 0x1d));
        for (int i = 0; i < 100; ++i) {
            double w = rng.real(0.05, 0.6);
            double w1 = rng.real(w * w + 1e-6, w);
            max_residual = std::max(max_residual,
                                    optimal_threshold_identity_check(w, w1).residual);
        }
        report("identity", "100 (w,w_1) pairs, max residual", max_residual, 1e-10,
               max_residual <= 1e-10);
    }
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"supermajority set-similarity search toolbox"};
    app.require_subcommand(1);

    std::vector<double> params_raw{0.1, 0.1, 0.05, 0.01};
    uint64_t seed = 1;

    auto* analyze = app.add_subcommand("analyze", "exponent tables as CSV");
    std::vector<double> budgets;
    std::vector<std::string> methods;
    analyze->add_option("--params", params_raw, "wq,wu,w1,w2")->delimiter(',')->expected(4);
    analyze->add_option("--budget", budgets, "rho_u budgets for the trade-off curve")
        ->delimiter(',');
    analyze->add_option("--method", methods, "restrict to these methods")->delimiter(',');

    auto* gen = app.add_subcommand("gen", "generate a planted instance (GSS1)");
    uint64_t n = 1024, n_queries = 200;
    int64_t n_planted = -1;
    uint32_t d = 1000;
    std::string out = "instance.gss1", text_out;
    gen->add_option("--params", params_raw, "wq,wu,w1,w2")->delimiter(',')->expected(4);
    gen->add_option("--n", n, "dataset size");
    gen->add_option("--d", d, "universe size");
    gen->add_option("--queries", n_queries, "number of queries");
    gen->add_option("--planted", n_planted, "planted pairs (default: all queries)");
    gen->add_option("--seed", seed, "random seed");
    gen->add_option("--out", out, "output path");
    gen->add_option("--text-out", text_out, "optional line-oriented export");

    auto* bench = app.add_subcommand("bench", "plan, build and query an instance");
    std::string in = "instance.gss1";
    std::optional<uint32_t> reps;
    std::optional<double> tq, tu;
    bool sampled_verify = false;
    bench->add_option("--in", in, "GSS1 instance path");
    bench->add_option("--seed", seed, "random seed");
    bench->add_option("--reps", reps, "repetition override (skips the pilot)");
    bench->add_option("--tq", tq, "query threshold before snapping");
    bench->add_option("--tu", tu, "update threshold before snapping");
    bench->add_flag("--sampled-verify", sampled_verify, "sampled overlap verification");

    auto* verify = app.add_subcommand("verify", "lemma grids and moment checks");
    std::string lemma = "all";
    uint32_t kmax = 16;
    uint64_t trials = 100000;
    verify->add_option("--lemma", lemma,
                       "quadrant|pointmass|rearrangement|moments|identity|all");
    verify->add_option("--kmax", kmax, "largest walk length");
    verify->add_option("--trials", trials, "Monte Carlo trials per moment check");
    verify->add_option("--seed", seed, "random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) return cmd_analyze(parse_params(params_raw), budgets, methods);
        if (*gen) {
            auto planted = n_planted < 0 ? n_queries : static_cast<uint64_t>(n_planted);
            return cmd_gen(parse_params(params_raw), n, d, n_queries, planted, seed, out,
                           text_out);
        }
        if (*bench) return cmd_bench(in, seed, reps, tq, tu, sampled_verify);
        if (*verify) return cmd_verify(lemma, kmax, trials, seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
