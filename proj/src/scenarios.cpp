#include "blindmm/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <tuple>

#include <fmt/format.h>

#include "blindmm/estimators.hpp"

namespace blindmm {

namespace {

Model diagonal_model(const std::vector<double>& variances) {
    return build_model(Matrix::identity(variances.size()), Matrix::diagonal(variances));
}

std::string valid_names() {
    std::string out;
    for (auto name : kScenarioNames) {
        if (!out.empty()) out += ", ";
        out += name;
    }
    return out;
}

template <class T>
bool parse_number(std::string_view text, T& value) {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    return ec == std::errc() && ptr == text.data() + text.size();
}

std::vector<EstimatorSpec> specs(std::initializer_list<std::string_view> names) {
    std::vector<EstimatorSpec> out;
    for (auto n : names) out.push_back(parse_estimator_spec(n));
    return out;
}

ScenarioRun run_policies(const std::string& name, const Model& model,
                         std::vector<DirectionPolicy> policies,
                         std::initializer_list<std::string_view> estimators,
                         const ScenarioOptions& opt) {
    const auto dirs = resolve_directions(model, policies, opt.seed);
    const auto snr = default_snr_grid();
    return {run_directions(model, name, dirs, specs(estimators), snr, opt.trials, opt.seed,
                           opt.workers),
            {}};
}

ScenarioRun run_range(const std::string& name, const Model& model, const ScenarioOptions& opt) {
    using K = DirectionPolicy::Kind;
    std::vector<DirectionPolicy> policies{{K::MaxEigenvector, 0, {}}, {K::MinEigenvector, 0, {}}};
    if (opt.random_directions > 0) policies.push_back({K::RandomSphere, opt.random_directions, {}});
    ScenarioRun run = run_policies(name, model, policies, {"ls", "sbme", "ebme:b=-1"}, opt);
    append_envelopes(run.rows);
    sort_rows(run.rows);
    return run;
}

ScenarioRun run_fig6(const ScenarioOptions& opt) {
    const auto estimators = specs({"ls", "sbme", "ebme:b=-1", "bock"});
    const std::vector<double> snr{0.0};
    ScenarioRun run;
    for (double cond : condition_grid()) {
        const Model model = scenario_fig6(cond);
        // first column of the Q basis: largest eigenvalue of Q, i.e. the cleanest direction
        const NamedDirection dir{fmt::format("cond={:09.2f}", cond), model.Q_eig().basis.column(0)};
        auto rows = run_directions(model, "fig6-cond", std::span(&dir, 1), estimators, snr,
                                   opt.trials, opt.seed, opt.workers);
        run.rows.insert(run.rows.end(), rows.begin(), rows.end());
    }
    sort_rows(run.rows);
    return run;
}

ScenarioRun run_fig7(const ScenarioOptions& opt) {
    const Model model = scenario_fig7();
    const NamedDirection dir{"high-variance-axis", fig7_direction()};
    const auto snr = default_snr_grid();
    return {run_directions(model, "fig7-tikhonov", std::span(&dir, 1),
                           specs({"ls", "sbme", "ebme:b=-1", "tik1", "tik2"}), snr, opt.trials,
                           opt.seed, opt.workers),
            {}};
}

ScenarioRun run_fig2(const ScenarioOptions& opt) {
    const DctScenario sc = scenario_fig2_dct();
    const DctReport r = dct_report(sc, opt.trials, opt.seed);
    ScenarioRun run;
    const auto add = [&](std::string_view est, double mse, double se) {
        run.rows.push_back({"fig2-dct", estimator_label(parse_estimator_spec(est)), sc.snr_db,
                            "smooth-signal", mse, se, r.trials, opt.seed, sc.model.eps0()});
    };
    add("ls", r.ls_mse, r.ls_stderr);
    add("sbme", r.sbme_mse, r.sbme_stderr);
    add("ebme:b=-1", r.ebme_mse, r.ebme_stderr);
    sort_rows(run.rows);

    const auto reduction = [&](double mse) { return 100.0 * (1.0 - mse / r.ls_mse); };
    run.report = fmt::format(
        "DCT denoising at {} dB over {} draws\n"
        "  SBME gain        mean {:.4f}  (min {:.4f}, max {:.4f})\n"
        "  EBME gain range  {:.4f} .. {:.4f}  (per-draw extremes, averaged)\n"
        "  EBME gains monotone in noise variance: {}\n"
        "  error vs LS      SBME {:+.1f}%  EBME {:+.1f}%\n",
        sc.snr_db, r.trials, r.sbme_gain_mean, r.sbme_gain_min, r.sbme_gain_max, r.ebme_gain_min,
        r.ebme_gain_max, r.ebme_gain_monotone ? "yes" : "no", -reduction(r.sbme_mse),
        -reduction(r.ebme_mse));
    return run;
}

}  // namespace

Model scenario_fig4() {
    return diagonal_model({1, 1, 1, 1, .5, .2, .2, .2, .2, .1, .1, .1, .1, .05, .05});
}

Model scenario_fig5a() {
    std::vector<double> v(15);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 - 0.99 * static_cast<double>(i) / 14.0;
    return diagonal_model(v);
}

Model scenario_fig5b() { return diagonal_model({1, 1, 1, 1, 1, .1, .1, .1, .1, .1}); }

Model scenario_fig6(double cond) {
    if (!(cond >= 1.0) || !std::isfinite(cond)) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("condition number {} must be >= 1", cond));
    }
    const double v = 1.0 / cond;
    return diagonal_model({1, 1, 1, 1, 1, v, v, v, v, v});
}

Model scenario_fig7() { return diagonal_model({100, 100, 100, 100, 100, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1}); }

Model scenario_iid(std::size_t m) {
    if (m == 0) throw Error(ErrorCode::InvalidArgument, "iid model needs m >= 1");
    return diagonal_model(std::vector<double>(m, 1.0));
}

Vector fig7_direction() {
    Vector e(15);
    e[0] = 1.0;
    return e;
}

std::vector<double> default_snr_grid() {
    std::vector<double> out;
    for (int i = 0; i <= 12; ++i) out.push_back(-10.0 + 2.5 * i);
    return out;
}

std::vector<double> condition_grid() {
    std::vector<double> out;
    for (int i = 0; i <= 6; ++i) out.push_back(std::pow(10.0, i / 2.0));
    return out;
}

Matrix dct_matrix(std::size_t n) {
    Matrix h(n, n);
    const double nn = static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = std::sqrt((k == 0 ? 1.0 : 2.0) / nn);
        for (std::size_t t = 0; t < n; ++t) {
            h(k, t) = s * std::cos(std::numbers::pi * (static_cast<double>(t) + 0.5) *
                                   static_cast<double>(k) / nn);
        }
    }
    return h;
}

DctScenario scenario_fig2_dct(double snr_db) {
    constexpr std::size_t n = 100;
    constexpr std::size_t noisy = 10;
    std::vector<double> variances(n, 1.0);
    for (std::size_t k = n - noisy; k < n; ++k) variances[k] = 1000.0;
    Model model = build_model(dct_matrix(n), Matrix::diagonal(variances));

    Vector shape(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double u = static_cast<double>(t);
        shape[t] = std::exp(-std::pow((u - 30.0) / 8.0, 2)) + 0.6 * std::exp(-std::pow((u - 70.0) / 5.0, 2));
    }
    Vector signal = scale_to_snr(model, shape, snr_db);
    return {std::move(model), std::move(signal), snr_db};
}

DctReport dct_report(const DctScenario& sc, std::size_t trials, std::uint64_t seed) {
    if (trials < 2) throw Error(ErrorCode::InvalidArgument, "dct report needs at least 2 trials");
    const Model& model = sc.model;
    const std::size_t m = model.m();
    const EbmeKernel kernel(model, -1.0);

    // components ordered by increasing noise variance 1/σ
    const auto& sigma = model.Q_eig().eigenvalues;
    std::vector<std::size_t> by_noise(m);
    std::iota(by_noise.begin(), by_noise.end(), std::size_t{0});
    std::stable_sort(by_noise.begin(), by_noise.end(),
                     [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

    std::vector<double> ls_se(trials), sbme_se(trials), ebme_se(trials);
    std::vector<double> sbme_gain(trials), ebme_min(trials), ebme_max(trials);
    DctReport rep;
    rep.trials = trials;
    rep.snr_db = sc.snr_db;
    const Vector hx = model.H() * sc.signal;
    const auto err = [&](const Vector& xhat) { return squared_norm(xhat - sc.signal); };

    for (std::size_t t = 0; t < trials; ++t) {
        RngStream rng(seed, t);
        const Vector y = hx + gaussian_vector(model.Cw_sqrt(), rng);
        const Vector xls = ls_estimate(model, y);
        const EstimateResult s = sbme(model, xls);
        const EstimateResult e = kernel.apply(xls, true);
        ls_se[t] = err(xls);
        sbme_se[t] = err(s.xhat);
        ebme_se[t] = err(e.xhat);
        sbme_gain[t] = s.shrinkage[0];
        const auto [lo, hi] = std::minmax_element(e.shrinkage.begin(), e.shrinkage.end());
        ebme_min[t] = *lo;
        ebme_max[t] = *hi;
        for (std::size_t i = 1; i < m; ++i) {
            if (e.shrinkage[by_noise[i]] > e.shrinkage[by_noise[i - 1]] + 1e-12) {
                rep.ebme_gain_monotone = false;
            }
        }
    }

    std::tie(rep.ls_mse, rep.ls_stderr) = mean_and_stderr(ls_se);
    std::tie(rep.sbme_mse, rep.sbme_stderr) = mean_and_stderr(sbme_se);
    std::tie(rep.ebme_mse, rep.ebme_stderr) = mean_and_stderr(ebme_se);
    rep.sbme_gain_mean = mean_and_stderr(sbme_gain).first;
    rep.sbme_gain_min = *std::min_element(sbme_gain.begin(), sbme_gain.end());
    rep.sbme_gain_max = *std::max_element(sbme_gain.begin(), sbme_gain.end());
    rep.ebme_gain_min = mean_and_stderr(ebme_min).first;
    rep.ebme_gain_max = mean_and_stderr(ebme_max).first;
    return rep;
}

Model model_for_scenario(std::string_view name) {
    if (name == "fig4" || name == "fig4-snr" || name == "fig3-pp") return scenario_fig4();
    if (name == "fig5a" || name == "fig5a-range") return scenario_fig5a();
    if (name == "fig5b" || name == "fig5b-range") return scenario_fig5b();
    if (name == "fig7" || name == "fig7-tikhonov") return scenario_fig7();
    if (name == "dct" || name == "fig2-dct") return scenario_fig2_dct().model;
    if (name.starts_with("fig6:cond=")) {
        double cond = 0.0;
        if (!parse_number(name.substr(10), cond) || !(cond >= 1.0)) {
            throw Error(ErrorCode::Config, fmt::format("scenario: bad condition number in '{}'", name));
        }
        return scenario_fig6(cond);
    }
    if (name.starts_with("iid:m=")) {
        std::size_t m = 0;
        if (!parse_number(name.substr(6), m) || m == 0) {
            throw Error(ErrorCode::Config, fmt::format("scenario: bad dimension in '{}'", name));
        }
        return scenario_iid(m);
    }
    throw Error(ErrorCode::Config,
                fmt::format("scenario: unknown model '{}' (expected fig4, fig5a, fig5b, fig7, dct, "
                            "fig6:cond=<c>, iid:m=<m> or an inline H/Cw object)",
                            name));
}

ScenarioRun run_scenario(std::string_view name, const ScenarioOptions& opt) {
    using K = DirectionPolicy::Kind;
    if (name == "fig2-dct") return run_fig2(opt);
    if (name == "fig3-pp") {
        return run_policies("fig3-pp", scenario_fig4(), {{K::MaxEigenvector, 0, {}}},
                            {"ls", "sbme", "bbm", "pbm"}, opt);
    }
    if (name == "fig4-snr") {
        return run_policies("fig4-snr", scenario_fig4(),
                            {{K::MaxEigenvector, 0, {}}, {K::MinEigenvector, 0, {}}},
                            {"ls", "sbme", "ebme:b=-1", "bock"}, opt);
    }
    if (name == "fig5a-range") return run_range("fig5a-range", scenario_fig5a(), opt);
    if (name == "fig5b-range") return run_range("fig5b-range", scenario_fig5b(), opt);
    if (name == "fig6-cond") return run_fig6(opt);
    if (name == "fig7-tikhonov") return run_fig7(opt);
    throw Error(ErrorCode::Config,
                fmt::format("unknown scenario '{}'; valid names: {}", name, valid_names()));
}

void append_envelopes(std::vector<MseRow>& rows) {
    using Key = std::tuple<std::string, std::string, double>;
    std::map<Key, std::pair<const MseRow*, const MseRow*>> extremes;
    for (const MseRow& r : rows) {
        if (r.sweep_key.starts_with("envelope-")) continue;
        auto [it, inserted] = extremes.try_emplace(Key{r.scenario, r.estimator, r.snr_db}, &r, &r);
        if (inserted) continue;
        if (r.mse_mean < it->second.first->mse_mean) it->second.first = &r;
        if (r.mse_mean > it->second.second->mse_mean) it->second.second = &r;
    }
    std::vector<MseRow> added;
    for (const auto& [key, ext] : extremes) {
        MseRow lo = *ext.first;
        lo.sweep_key = "envelope-min";
        MseRow hi = *ext.second;
        hi.sweep_key = "envelope-max";
        added.push_back(std::move(lo));
        added.push_back(std::move(hi));
    }
    rows.insert(rows.end(), added.begin(), added.end());
}

}  // namespace blindmm
