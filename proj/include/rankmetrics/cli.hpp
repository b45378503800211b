#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rankmetrics/axiom_lab.hpp"
#include "rankmetrics/metric_keys.hpp"
#include "rankmetrics/pipelines.hpp"
#include "rankmetrics/portfolio_opt.hpp"

namespace rankmetrics::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationError = 1;
inline constexpr int kExitPropertyFailure = 2;

namespace detail {

inline std::vector<std::string> collect_metric_keys(const std::string& joined,
                                                    const std::vector<std::string>& singles,
                                                    const std::string& fallback) {
    std::vector<std::string> keys;
    std::stringstream ss(joined);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) keys.push_back(item);
    }
    keys.insert(keys.end(), singles.begin(), singles.end());
    if (keys.empty() && !fallback.empty()) {
        std::stringstream fs(fallback);
        while (std::getline(fs, item, ',')) keys.push_back(item);
    }
    return keys;
}

inline void ensure_out_dir(const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

inline ScenarioDist pool_panel(const ReturnPanel& panel) {
    std::vector<double> all;
    all.reserve(panel.returns.size() * panel.tickers.size());
    for (const auto& row : panel.returns) {
        all.insert(all.end(), row.begin(), row.end());
    }
    return ScenarioDist::equal_weights(std::move(all));
}

inline std::string render_opt_result(const std::string& key, const OptResult& result,
                                     const std::vector<std::string>& tickers,
                                     const OptimizerOptions& opts) {
    std::ostringstream os;
    os << "key,value\n";
    os << "metric," << key << '\n';
    os << "value," << rankmetrics::detail::format_metric_value(result.best_value) << '\n';
    os << "n_starts," << result.n_starts << '\n';
    os << "n_converged," << result.n_converged << '\n';
    os << "ties_averaged," << (result.ties_averaged ? 1 : 0) << '\n';
    os << "seed," << opts.seed << '\n';
    os << "tol," << rankmetrics::detail::format_g12(opts.tol) << '\n';
    os << "optimizer,nelder-mead-softmax\n";
    os << "return_convention,simple\n";
    for (std::size_t i = 0; i < tickers.size(); ++i) {
        os << "weight_" << tickers[i] << ','
           << rankmetrics::detail::format_g12(result.best_weights.weights[i]) << '\n';
    }
    return os.str();
}

struct SuiteOutcome {
    std::vector<PropertyReport> reports;
    bool any_must_hold_violated = false;
};

inline void run_metric_suites(SuiteOutcome& outcome, const RankingMetric& metric,
                              const DistSampler& sampler, std::uint64_t trials) {
    const std::size_t first = outcome.reports.size();
    if (metric.traits.monotone) {
        outcome.reports.push_back(check_monotonicity(metric, sampler, trials));
    }
    if (metric.traits.cash_quasiconcave) {
        outcome.reports.push_back(check_cash_quasiconcavity(metric, sampler, trials));
        outcome.reports.push_back(check_level_sets(metric, sampler, trials));
    }
    if (metric.traits.quasiconcave) {
        outcome.reports.push_back(check_quasiconcavity(metric, sampler, trials));
    }
    if (metric.traits.cash_subadditive) {
        outcome.reports.push_back(check_cash_subadditivity(metric, sampler, trials));
    }
    if (metric.traits.cash_additive_on_support) {
        outcome.reports.push_back(check_cash_additivity_on_support(metric, sampler, trials));
    }
    for (std::size_t i = first; i < outcome.reports.size(); ++i) {
        if (outcome.reports[i].verdict == Verdict::violated) {
            outcome.any_must_hold_violated = true;
        }
    }
}

inline SuiteOutcome run_builtin_suites(std::uint64_t trials, std::uint64_t seed) {
    SuiteOutcome outcome;
    DistSampler sampler;
    sampler.seed = seed;

    const std::vector<std::string> dist_keys = {
        "glr",
        "omega",
        "raroc:cvar:0.05",
        "lvar:two_step:0.55:0.65:0",
        "lvar:two_step:0.65:0.55:0",
        "ce:plinear:0:0.1",
        "ce:id",
        "family:shift:cvar:0.05",
    };
    for (const auto& key : dist_keys) {
        const RankingMetric metric = parse_metric_key(key).make(nullptr);
        run_metric_suites(outcome, metric, sampler, trials);
    }

    // Omega's quasiconcavity is expected to fail: falsification mode.
    outcome.reports.push_back(
        falsify_quasiconcavity(make_omega(), sampler, std::max<std::uint64_t>(trials, 10000)));

    // profile-space suites for the bibliometric indices
    ProfileSampler profiles;
    profiles.seed = seed;
    struct BiblioCase {
        PerfCurveFamily fam;
        double min_shift;
    };
    const std::vector<BiblioCase> biblio = {
        {PerfCurveFamily::h(), 0.0},
        {PerfCurveFamily::h2(), 1.0},
        {PerfCurveFamily::h_alpha(0.5), -1.0},  // subadditivity not claimed for alpha < 1
        {PerfCurveFamily::h_alpha(1.5), 0.0},
        {PerfCurveFamily::w(), 1e-6},
    };
    for (const auto& c : biblio) {
        for (auto rep : {check_profile_monotonicity(c.fam, profiles, trials),
                         check_profile_cash_quasiconcavity(c.fam, profiles, trials),
                         check_profile_quasiconcavity(c.fam, profiles, trials)}) {
            if (rep.verdict == Verdict::violated) outcome.any_must_hold_violated = true;
            outcome.reports.push_back(std::move(rep));
        }
        if (c.min_shift >= 0.0) {
            auto rep = check_profile_cash_subadditivity(c.fam, profiles, trials, c.min_shift);
            if (rep.verdict == Verdict::violated) outcome.any_must_hold_violated = true;
            outcome.reports.push_back(std::move(rep));
        }
    }

    // built-in family certificates
    const auto cvar05 = [](const ScenarioDist& d) { return cvar_historical(d, 0.05); };
    const std::vector<RiskFamily> families = {
        shift_family("shift:cvar:0.05", cvar05),
        mean_risk_ratio_family("raroc-family:cvar:0.05", cvar05),
        expectile_exponent_family("evar-exponent:1/(1+x)",
                                  [](double x) { return 1.0 / (1.0 + x); }),
        shift_family("shift:lvar:0.65:0.55",
                     [lam = LambdaFn::two_step(0.65, 0.55, 0.0)](const ScenarioDist& d) {
                         const auto v = lambda_var(d, lam);
                         return v ? *v : std::numeric_limits<double>::infinity();
                     }),
    };
    for (const auto& fam : families) {
        auto rep = check_family_monotone(fam, sampler, std::min<std::uint64_t>(trials, 200));
        if (rep.verdict == Verdict::violated) outcome.any_must_hold_violated = true;
        outcome.reports.push_back(std::move(rep));
    }

    // self-test: a planted violation must be caught, otherwise the suites
    // are vacuous
    auto planted = check_monotonicity(planted_violation_metric(), sampler, trials);
    planted.property = "harness self-test (planted violation)";
    if (planted.violations == 0) outcome.any_must_hold_violated = true;
    outcome.reports.push_back(std::move(planted));

    return outcome;
}

inline std::string render_reports_csv(const std::vector<PropertyReport>& reports) {
    std::ostringstream os;
    os << "property,metric,trials,violations,skipped,seed,verdict\n";
    for (const auto& r : reports) {
        os << r.property << ',' << r.metric << ',' << r.trials << ',' << r.violations << ','
           << r.skipped << ',' << r.seed << ',' << to_string(r.verdict) << '\n';
    }
    return os.str();
}

}  // namespace detail

/// Entry point shared by the binary and the tests. Returns the process
/// exit status: 0 ok, 1 validation error, 2 property-suite failure.
inline int run_cli(std::vector<std::string> args) {
    CLI::App app{"ranking-metric toolkit"};
    app.require_subcommand(1);

    std::string input_path;
    std::string zones_path;
    std::string groups_path;
    std::string metrics_joined;
    std::vector<std::string> metric_singles;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    std::uint64_t trials = 10000;
    std::size_t starts = 64;
    double tol = 1e-9;

    auto* rank = app.add_subcommand("rank", "rank portfolios from a returns panel");
    rank->add_option("--input", input_path, "returns CSV (date,T1,T2,...)")->required();
    rank->add_option("--groups", groups_path, "portfolio groups CSV (portfolio,ticker)")
        ->required();
    rank->add_option("--metrics", metrics_joined, "comma-separated metric keys");
    rank->add_option("--metric", metric_singles, "metric key (repeatable)");
    rank->add_option("--out", out_dir, "output directory");

    auto* climate = app.add_subcommand("climate", "rank zones from a losses panel");
    climate->add_option("--input", input_path, "losses CSV (country,Y1,Y2,...)")->required();
    climate->add_option("--zones", zones_path, "zone map CSV (country,zone)")->required();
    climate->add_option("--metrics", metrics_joined, "comma-separated metric keys");
    climate->add_option("--metric", metric_singles, "metric key (repeatable)");
    climate->add_option("--out", out_dir, "output directory");

    auto* optimize = app.add_subcommand("optimize", "metric-maximizing weights");
    optimize->add_option("--input", input_path, "returns CSV (date,T1,T2,...)")->required();
    optimize->add_option("--metrics", metrics_joined, "comma-separated metric keys");
    optimize->add_option("--metric", metric_singles, "metric key (repeatable)");
    optimize->add_option("--starts", starts, "number of random starts");
    optimize->add_option("--seed", seed, "random seed");
    optimize->add_option("--tol", tol, "tie tolerance");
    optimize->add_option("--out", out_dir, "output directory");

    auto* verify = app.add_subcommand("verify", "run the axiom property suites");
    verify->add_option("--trials", trials, "trials per suite");
    verify->add_option("--seed", seed, "sampler seed");
    verify->add_option("--out", out_dir, "output directory");

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n';
        return kExitValidationError;
    }

    try {
        if (rank->parsed()) {
            const auto keys = detail::collect_metric_keys(
                metrics_joined, metric_singles,
                "glr,omega,raroc:cvar:0.05,lvar:two_step:0.55:0.65,"
                "lvar:two_step:0.85:0.95,h,h2,halpha:0.5,w");
            const auto specs = parse_metric_keys(keys);
            IngestReport report;
            const ReturnPanel panel = load_returns(input_path, &report);
            if (report.rows_dropped > 0) {
                std::cerr << "note: dropped " << report.rows_dropped
                          << " row(s) with blank cells\n";
            }
            const auto groups = load_groups(groups_path);
            const Leaderboard board = rank_portfolios(panel, groups, specs);
            detail::ensure_out_dir(out_dir);
            std::ostringstream os;
            write_leaderboard_csv(os, board);
            detail::write_file(out_dir + "/leaderboard.csv", os.str());
            write_plot_data(out_dir, board);
            std::cout << "wrote " << out_dir << "/leaderboard.csv\n";
            return kExitOk;
        }

        if (climate->parsed()) {
            const auto keys = detail::collect_metric_keys(
                metrics_joined, metric_singles,
                "glr,omega,raroc:cvar:0.05,lvar:two_step:0.55:0.65,"
                "lvar:two_step:0.85:0.95,h,h2,halpha:0.5,w");
            const auto specs = parse_metric_keys(keys);
            IngestReport report;
            const LossPanel losses = load_losses(input_path, &report);
            if (report.rows_dropped > 0) {
                std::cerr << "note: dropped " << report.rows_dropped
                          << " row(s) with blank cells\n";
            }
            const ZoneMap zm = load_zone_map(zones_path);
            const Leaderboard board = rank_zones(losses, zm, specs, 0.75, 0.1);
            detail::ensure_out_dir(out_dir);
            std::ostringstream os;
            write_leaderboard_csv(os, board);
            detail::write_file(out_dir + "/leaderboard.csv", os.str());
            write_plot_data(out_dir, board);
            std::cout << "wrote " << out_dir << "/leaderboard.csv\n";
            return kExitOk;
        }

        if (optimize->parsed()) {
            const auto keys = detail::collect_metric_keys(metrics_joined, metric_singles,
                                                          "raroc:cvar_t:0.05");
            const auto specs = parse_metric_keys(keys);
            const ReturnPanel panel = load_returns(input_path);
            const ScenarioDist pooled = detail::pool_panel(panel);
            OptimizerOptions opts;
            opts.n_starts = starts;
            opts.seed = seed;
            opts.tol = tol;
            detail::ensure_out_dir(out_dir);
            for (const auto& spec : specs) {
                OptResult result;
                if (spec.kind == MetricSpec::Kind::biblio) {
                    result = maximize_profile_rank(panel.returns, *spec.family, opts);
                } else {
                    const RankingMetric metric = spec.make(&pooled);
                    result = maximize_metric(panel.returns, metric, opts);
                }
                const std::string path =
                    out_dir + "/opt_" + sanitize_metric_key(spec.key) + ".csv";
                detail::write_file(path,
                                   detail::render_opt_result(spec.key, result, panel.tickers,
                                                             opts));
                std::cout << "wrote " << path << '\n';
            }
            return kExitOk;
        }

        if (verify->parsed()) {
            const auto outcome = detail::run_builtin_suites(trials, seed);
            detail::ensure_out_dir(out_dir);
            detail::write_file(out_dir + "/verify_report.csv",
                               detail::render_reports_csv(outcome.reports));
            for (const auto& r : outcome.reports) {
                std::cout << r.property << " | " << r.metric << " | trials=" << r.trials
                          << " violations=" << r.violations << " skipped=" << r.skipped
                          << " -> " << to_string(r.verdict) << '\n';
                if (r.verdict == Verdict::violated && r.worst) {
                    std::cout << "    worst: " << r.worst->inputs << '\n';
                }
            }
            if (outcome.any_must_hold_violated) {
                std::cerr << "property-suite failure\n";
                return kExitPropertyFailure;
            }
            std::cout << "all declared properties hold on sample\n";
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidationError;
    }
    return kExitValidationError;
}

}  // namespace rankmetrics::cli
