#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "blindmm/config.hpp"
#include "blindmm/csv.hpp"
#include "blindmm/estimators.hpp"
#include "blindmm/scenarios.hpp"
#include "blindmm/sim.hpp"

namespace blindmm::cli {

namespace {

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::Config:
            return kUsage;
        case ErrorCode::DegenerateG:
            return kDegenerate;
        default:
            return kData;
    }
}

/// Seed from BLINDMM_SEED, if set. Throws Config when it is not an unsigned integer.
std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("BLINDMM_SEED");
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    const std::string_view s(raw);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::Config, fmt::format("BLINDMM_SEED: '{}' is not an unsigned integer", s));
    }
    return v;
}

void print_summary(std::ostream& out, const std::vector<MseRow>& rows) {
    fmt::print(out, "{:<22} {:>8} {:<22} {:>14} {:>12} {:>9}\n", "estimator", "snr_db", "sweep_key",
               "mse", "stderr", "mse/eps0");
    for (const auto& r : rows) {
        if (r.sweep_key.starts_with("rand")) continue;
        fmt::print(out, "{:<22} {:>8} {:<22} {:>14.6g} {:>12.4g} {:>9.4f}\n", r.estimator, r.snr_db,
                   r.sweep_key, r.mse_mean, r.mse_stderr, r.eps0 > 0 ? r.mse_mean / r.eps0 : 0.0);
    }
}

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    unsigned workers = 0;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
    cmd->add_option("--seed", o.seed, "random seed (default: BLINDMM_SEED, then 1; a config seed wins over both)");
    cmd->add_option("--trials", o.trials, "Monte Carlo trials per point")->check(CLI::Range(2, 1 << 30));
    cmd->add_option("--workers", o.workers, "worker threads (0 = all cores)")->capture_default_str();
}

int cmd_experiment(const std::string& config_path, const std::string& out_path, const RunOptions& o,
                   std::ostream& out) {
    ConfigFile file;
    try {
        file = load_config(config_path);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Config || e.code() == ErrorCode::Io) {
            throw Error(ErrorCode::Config, e.what());
        }
        throw;
    }
    ExperimentConfig& c = file.config;
    c.seed = o.seed ? *o.seed : file.seed ? *file.seed : env_seed().value_or(1);
    if (o.trials) c.trials = *o.trials;

    const Model model = model_for_config(c);
    const auto rows = run_experiment(model, c, o.workers);
    write_file_atomic(out_path, format_rows_csv(rows));
    fmt::print(out, "scenario {}  eps0 {:.6g}  trials {}  seed {}\n", c.scenario, model.eps0(),
               c.trials, c.seed);
    print_summary(out, rows);
    fmt::print(out, "wrote {} rows to {}\n", rows.size(), out_path);
    return kOk;
}

int cmd_estimate(const std::string& h_path, const std::string& cw_path, const std::string& y_path,
                 const std::string& est_text, const std::string& out_path, std::ostream& out,
                 std::ostream& err) {
    const Matrix h = read_matrix_csv(h_path);
    const Matrix cw = read_matrix_csv(cw_path);
    const Vector y = read_vector_csv(y_path);
    const Model model = build_model(h, cw);
    if (y.size() != model.n()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("y has {} entries, H has {} rows", y.size(), model.n()));
    }
    const EstimatorSpec spec =
        parse_estimator_spec(est_text, std::filesystem::path(y_path).parent_path());
    const EstimateResult r = estimate(model, spec, y);
    if (r.degenerate) {
        fmt::print(err, "error: {} is undefined for a zero LS estimate; no output written\n",
                   estimator_label(spec));
        return kDegenerate;
    }
    write_file_atomic(out_path, format_vector_csv(r.xhat));

    const auto [lo, hi] = std::minmax_element(r.shrinkage.begin(), r.shrinkage.end());
    fmt::print(out, "estimator            {}\n", estimator_label(spec));
    if (*lo == *hi) {
        fmt::print(out, "gain                 {:.6g}\n", *lo);
    } else {
        fmt::print(out, "gain range           {:.6g} .. {:.6g}\n", *lo, *hi);
    }
    fmt::print(out, "eps0                 {:.6g}\n", model.eps0());
    fmt::print(out, "effective dimension  {:.6g}\n", effective_dimension(model));
    fmt::print(out, "wrote {}\n", out_path);
    return kOk;
}

int cmd_check(const std::string& h_path, const std::string& cw_path, double b, std::ostream& out) {
    const Model model = build_model(read_matrix_csv(h_path), read_matrix_csv(cw_path));
    const auto verdict = [](bool ok) { return ok ? "PASS" : "FAIL"; };
    fmt::print(out, "eps0                 {:.10g}\n", model.eps0());
    fmt::print(out, "eps_max              {:.10g}\n", model.eps_max());
    fmt::print(out, "effective dimension  {:.10g}\n", effective_dimension(model));
    fmt::print(out, "cond(Q)              {:.10g}\n", condition_number(model.Q_eig()));
    fmt::print(out, "SBME dominance condition (eps0/eps_max > 4): {}\n",
               verdict(sbme_dominance_holds(model)));
    fmt::print(out, "EBME dominance condition (b = {}): {}\n", b, verdict(ebme_dominance_holds(model, b)));
    return kOk;
}

int cmd_scenario(const std::string& name, const std::string& out_path, const RunOptions& o,
                 std::size_t random_directions, std::ostream& out) {
    ScenarioOptions opt;
    opt.seed = o.seed ? *o.seed : env_seed().value_or(1);
    if (o.trials) opt.trials = *o.trials;
    opt.workers = o.workers;
    opt.random_directions = random_directions;
    const ScenarioRun run = run_scenario(name, opt);
    write_file_atomic(out_path, format_rows_csv(run.rows));
    fmt::print(out, "scenario {}  trials {}  seed {}\n", name, opt.trials, opt.seed);
    print_summary(out, run.rows);
    if (!run.report.empty()) fmt::print(out, "{}", run.report);
    fmt::print(out, "wrote {} rows to {}\n", run.rows.size(), out_path);
    return kOk;
}

int cmd_stein(const std::vector<double>& v, const std::vector<double>& sigma, double c,
              std::size_t trials, std::optional<std::uint64_t> seed_flag, std::ostream& out) {
    const std::uint64_t seed = seed_flag ? *seed_flag : env_seed().value_or(1);
    const auto coords = stein_lemma_check(Vector(v), Vector(sigma), c, trials, seed);
    fmt::print(out, "{:>5} {:>14} {:>14} {:>12} {:>12} {:>8}\n", "coord", "E[dg/dv]", "-E[g(v-vhat)]",
               "|diff|", "stderr", "verdict");
    for (std::size_t i = 0; i < coords.size(); ++i) {
        const auto& s = coords[i];
        fmt::print(out, "{:>5} {:>14.8f} {:>14.8f} {:>12.3e} {:>12.3e} {:>8}\n", i, s.lhs_mean,
                   s.rhs_mean, s.discrepancy, s.combined_stderr,
                   s.discrepancy <= 4.0 * s.combined_stderr ? "PASS" : "FAIL");
    }
    return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Blind minimax estimation: estimators, diagnostics and Monte Carlo experiments",
                 "blindmm"};
    app.require_subcommand(1);

    std::string config_path, out_path, h_path, cw_path, y_path, est_text, scenario_name;
    RunOptions run_opts;
    double b = -1.0;
    std::size_t random_directions = 200;
    std::vector<double> stein_v, stein_sigma;
    double stein_c = 1.0;
    std::size_t stein_trials = 1000000;
    std::optional<std::uint64_t> stein_seed;

    auto* experiment = app.add_subcommand("experiment", "run a JSON-configured MSE sweep");
    experiment->add_option("--config", config_path, "experiment JSON")->required();
    experiment->add_option("--out", out_path, "results CSV")->required();
    add_run_options(experiment, run_opts);

    auto* est = app.add_subcommand("estimate", "apply one estimator to CSV data");
    est->add_option("--H", h_path, "n×m system matrix CSV")->required();
    est->add_option("--Cw", cw_path, "n×n noise covariance CSV")->required();
    est->add_option("--y", y_path, "observation vector CSV")->required();
    est->add_option("--estimator", est_text, "ls, sbme, ebme:b=-1, shrinkc:c=..., bbm, pbm, bock, "
                                             "tik1, tik2, offcenter:file=...")
        ->required();
    est->add_option("--out", out_path, "estimate CSV")->required();

    auto* check = app.add_subcommand("check", "print ε₀, effective dimension and dominance conditions");
    check->add_option("--H", h_path, "n×m system matrix CSV")->required();
    check->add_option("--Cw", cw_path, "n×n noise covariance CSV")->required();
    check->add_option("--b", b, "ellipsoid exponent")->capture_default_str();

    auto* scenario = app.add_subcommand("scenario", "run a built-in experiment");
    std::string names;
    for (auto n : kScenarioNames) names += std::string(names.empty() ? "" : ", ") + std::string(n);
    scenario->add_option("name", scenario_name, names)->required();
    scenario->add_option("--out", out_path, "results CSV")->required();
    scenario->add_option("--random-directions", random_directions,
                         "random directions for the range scenarios")
        ->capture_default_str();
    add_run_options(scenario, run_opts);

    auto* stein = app.add_subcommand("stein-check", "Monte Carlo check of Stein's identity");
    stein->add_option("--v", stein_v, "mean vector, comma separated")->required()->delimiter(',');
    stein->add_option("--sigma", stein_sigma, "diagonal of Σ, comma separated")->required()->delimiter(',');
    stein->add_option("--c", stein_c, "offset c >= 0")->capture_default_str();
    stein->add_option("--trials", stein_trials, "Monte Carlo trials (>= 10000)")->capture_default_str();
    stein->add_option("--seed", stein_seed, "random seed");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*experiment) return cmd_experiment(config_path, out_path, run_opts, out);
        if (*est) return cmd_estimate(h_path, cw_path, y_path, est_text, out_path, out, err);
        if (*check) return cmd_check(h_path, cw_path, b, out);
        if (*scenario) {
            return cmd_scenario(scenario_name, out_path, run_opts, random_directions, out);
        }
        if (*stein) return cmd_stein(stein_v, stein_sigma, stein_c, stein_trials, stein_seed, out);
    } catch (const Error& e) {
        fmt::print(err, "error: {}\n", e.what());
        return exit_code(e.code());
    } catch (const std::exception& e) {
        fmt::print(err, "error: {}\n", e.what());
        return kData;
    }
    return kUsage;
}

}  // namespace blindmm::cli
