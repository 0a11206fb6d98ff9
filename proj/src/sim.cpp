#include "blindmm/sim.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <tuple>

#include <fmt/format.h>

namespace blindmm {

namespace {

unsigned resolve_workers(unsigned workers, std::size_t trials) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(workers, trials));
}

/// Runs body(t) for t in [0, count) on `workers` threads with contiguous chunks.
template <class Body>
void parallel_for(std::size_t count, unsigned workers, Body body) {
    if (workers <= 1) {
        for (std::size_t t = 0; t < count; ++t) body(t);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = count * w / workers;
            const std::size_t end = count * (w + 1) / workers;
            pool.emplace_back([&, w, begin, end] {
                try {
                    for (std::size_t t = begin; t < end; ++t) body(t);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 16) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::pair<double, double> mean_and_stderr(std::span<const double> samples) {
    if (samples.empty()) return {0.0, 0.0};
    const auto n = static_cast<double>(samples.size());
    const double mean = pairwise_sum(samples) / n;
    if (samples.size() < 2) return {mean, 0.0};
    std::vector<double> dev2(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double d = samples[i] - mean;
        dev2[i] = d * d;
    }
    const double var = pairwise_sum(dev2) / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

Vector gaussian_vector(const Matrix& cw_sqrt, RngStream& rng) {
    Vector z(cw_sqrt.cols());
    for (double& v : z) v = rng.normal();
    return cw_sqrt * z;
}

std::vector<MseStats> monte_carlo(const Model& model, const Vector& x,
                                  std::span<const TrialEstimator> estimators, std::size_t trials,
                                  std::uint64_t seed, unsigned workers) {
    if (trials < 2) throw Error(ErrorCode::InvalidArgument, "monte_carlo needs at least 2 trials");
    if (x.size() != model.m()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("x has {} entries, model has m = {}", x.size(), model.m()));
    }
    const std::size_t count = estimators.size();
    std::vector<std::vector<double>> sq_err(count, std::vector<double>(trials));
    std::vector<std::vector<double>> gains(count, std::vector<double>(trials));
    const Vector hx = model.H() * x;

    parallel_for(trials, resolve_workers(workers, trials), [&](std::size_t t) {
        RngStream rng(seed, t);
        const Vector y = hx + gaussian_vector(model.Cw_sqrt(), rng);
        const Vector xls = ls_estimate(model, y);
        for (std::size_t e = 0; e < count; ++e) {
            EstimateResult r;
            try {
                r = estimators[e](y, xls);
            } catch (const Error& err) {
                throw Error(err.code(), fmt::format("trial {}: {}", t, err.what()));
            }
            double se = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = r.xhat[i] - x[i];
                se += d * d;
            }
            sq_err[e][t] = se;
            gains[e][t] = pairwise_sum(r.shrinkage.values()) / static_cast<double>(r.shrinkage.size());
        }
    });

    std::vector<MseStats> out(count);
    for (std::size_t e = 0; e < count; ++e) {
        std::tie(out[e].mse_mean, out[e].mse_stderr) = mean_and_stderr(sq_err[e]);
        out[e].mean_gain = pairwise_sum(gains[e]) / static_cast<double>(trials);
    }
    return out;
}

std::vector<MseStats> monte_carlo(const Model& model, const Vector& x,
                                  std::span<const Estimator> estimators, std::size_t trials,
                                  std::uint64_t seed, unsigned workers) {
    std::vector<TrialEstimator> fns;
    fns.reserve(estimators.size());
    for (const Estimator& e : estimators) {
        fns.emplace_back([&e](const Vector& y, const Vector& xls) { return e.apply(y, xls); });
    }
    return monte_carlo(model, x, std::span<const TrialEstimator>(fns), trials, seed, workers);
}

std::pair<double, double> monte_carlo_mse(const Model& model, const Vector& x,
                                          const EstimatorSpec& spec, std::size_t trials,
                                          std::uint64_t seed, unsigned workers) {
    const Estimator est(spec, model);
    const auto stats = monte_carlo(model, x, std::span<const Estimator>(&est, 1), trials, seed, workers);
    return {stats[0].mse_mean, stats[0].mse_stderr};
}

// --- experiments -------------------------------------------------------------

std::vector<NamedDirection> resolve_directions(const Model& model,
                                               std::span<const DirectionPolicy> policies,
                                               std::uint64_t seed) {
    const auto& basis = model.Q_eig().basis;
    const std::size_t m = model.m();
    std::vector<NamedDirection> out;
    std::size_t random_index = 0;
    std::size_t explicit_index = 0;
    for (const auto& p : policies) {
        switch (p.kind) {
            case DirectionPolicy::Kind::MaxEigenvector:
                out.push_back({"max-eigenvector", basis.column(m - 1)});
                break;
            case DirectionPolicy::Kind::MinEigenvector:
                out.push_back({"min-eigenvector", basis.column(0)});
                break;
            case DirectionPolicy::Kind::RandomSphere:
                for (std::size_t i = 0; i < p.count; ++i, ++random_index) {
                    RngStream rng(seed, kDirectionStreamBase + random_index);
                    Vector d(m);
                    double norm2 = 0.0;
                    while (norm2 == 0.0) {
                        for (double& v : d) v = rng.normal();
                        norm2 = squared_norm(d);
                    }
                    out.push_back({fmt::format("rand{:03}", random_index), (1.0 / std::sqrt(norm2)) * d});
                }
                break;
            case DirectionPolicy::Kind::Explicit:
                if (p.vector.size() != m) {
                    throw Error(ErrorCode::DimensionMismatch,
                                fmt::format("explicit direction has {} entries, model has m = {}",
                                            p.vector.size(), m));
                }
                if (squared_norm(p.vector) == 0.0) {
                    throw Error(ErrorCode::ZeroDirection, "explicit direction is zero");
                }
                out.push_back({fmt::format("explicit{:03}", explicit_index++), p.vector});
                break;
        }
    }
    return out;
}

void validate(const ExperimentConfig& config) {
    if (config.trials < 2) throw Error(ErrorCode::Config, "trials: must be at least 2");
    if (config.snr_grid_db.empty()) throw Error(ErrorCode::Config, "snr_grid_db: must be nonempty");
    if (config.directions.empty()) throw Error(ErrorCode::Config, "directions: must be nonempty");
    if (config.estimators.empty()) throw Error(ErrorCode::Config, "estimators: must be nonempty");
    for (double s : config.snr_grid_db) {
        if (!std::isfinite(s)) throw Error(ErrorCode::Config, "snr_grid_db: values must be finite");
    }
    for (const auto& d : config.directions) {
        if (d.kind == DirectionPolicy::Kind::RandomSphere && d.count == 0) {
            throw Error(ErrorCode::Config, "directions: random-sphere count must be positive");
        }
    }
}

std::vector<MseRow> run_directions(const Model& model, const std::string& scenario,
                                   std::span<const NamedDirection> directions,
                                   std::span<const EstimatorSpec> estimators,
                                   std::span<const double> snr_grid_db, std::size_t trials,
                                   std::uint64_t seed, unsigned workers) {
    std::vector<Estimator> ests;
    ests.reserve(estimators.size());
    for (const auto& spec : estimators) ests.emplace_back(spec, model);

    std::vector<MseRow> rows;
    for (const auto& dir : directions) {
        for (double snr : snr_grid_db) {
            const Vector x = scale_to_snr(model, dir.direction, snr);
            const auto stats =
                monte_carlo(model, x, std::span<const Estimator>(ests), trials, seed, workers);
            for (std::size_t e = 0; e < ests.size(); ++e) {
                rows.push_back({scenario, ests[e].label(), snr, dir.key, stats[e].mse_mean,
                                stats[e].mse_stderr, trials, seed, model.eps0()});
            }
        }
    }
    sort_rows(rows);
    return rows;
}

std::vector<MseRow> run_experiment(const Model& model, const ExperimentConfig& config,
                                   unsigned workers) {
    validate(config);
    const auto directions = resolve_directions(model, config.directions, config.seed);
    return run_directions(model, config.scenario, directions, config.estimators,
                          config.snr_grid_db, config.trials, config.seed, workers);
}

void sort_rows(std::vector<MseRow>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const MseRow& a, const MseRow& b) {
        return std::tie(a.scenario, a.estimator, a.snr_db, a.sweep_key) <
               std::tie(b.scenario, b.estimator, b.snr_db, b.sweep_key);
    });
}

std::string format_rows_csv(std::span<const MseRow> rows) {
    std::string out = kMseCsvHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", r.scenario, r.estimator, r.snr_db, r.sweep_key,
                           r.mse_mean, r.mse_stderr, r.trials, r.seed);
    }
    return out;
}

// --- Stein identity -------------------------------------------------------------

std::vector<SteinCoordinate> stein_lemma_check(const Vector& v, const Vector& sigma, double c,
                                               std::size_t trials, std::uint64_t seed,
                                               SteinTestFunction fn) {
    const std::size_t p = v.size();
    if (p == 0 || sigma.size() != p) {
        throw Error(ErrorCode::DimensionMismatch, "v and sigma must be nonempty and of equal length");
    }
    for (double s : sigma) {
        if (!(s > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma entries must be positive");
    }
    if (!(c >= 0.0)) throw Error(ErrorCode::InvalidArgument, "c must be >= 0");
    if (trials < 10000) throw Error(ErrorCode::InvalidArgument, "stein check needs >= 10^4 trials");
    if (fn == SteinTestFunction::ShrinkageRatio && c == 0.0 && squared_norm(v) == 0.0) {
        throw Error(ErrorCode::DegenerateG, "c = 0 with v = 0 makes g singular at the mean");
    }

    std::vector<std::vector<double>> lhs(p, std::vector<double>(trials));
    std::vector<std::vector<double>> rhs(p, std::vector<double>(trials));
    Vector vhat(p);
    for (std::size_t t = 0; t < trials; ++t) {
        RngStream rng(seed, t);
        double quad = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            vhat[i] = v[i] + rng.normal();
            quad += vhat[i] * vhat[i] / sigma[i];
        }
        const double denom = c + quad;
        for (std::size_t i = 0; i < p; ++i) {
            double g, dg;
            if (fn == SteinTestFunction::Linear) {
                g = vhat[i];
                dg = 1.0;
            } else {
                g = vhat[i] / denom;
                dg = 1.0 / denom - 2.0 * vhat[i] * vhat[i] / (sigma[i] * denom * denom);
            }
            lhs[i][t] = dg;
            rhs[i][t] = -g * (v[i] - vhat[i]);
        }
    }

    std::vector<SteinCoordinate> out(p);
    for (std::size_t i = 0; i < p; ++i) {
        const auto [lm, ls] = mean_and_stderr(lhs[i]);
        const auto [rm, rs] = mean_and_stderr(rhs[i]);
        out[i] = {lm, ls, rm, rs, std::abs(lm - rm), std::hypot(ls, rs)};
    }
    return out;
}

}  // namespace blindmm
