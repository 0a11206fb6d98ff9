#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "blindmm/estimators.hpp"
#include "blindmm/model.hpp"
#include "blindmm/rng.hpp"

namespace blindmm {

/// cw_sqrt·z with z ~ N(0, I); cw_sqrt must be the PSD square root of Cw.
Vector gaussian_vector(const Matrix& cw_sqrt, RngStream& rng);

struct MseStats {
    double mse_mean = 0.0;
    /// sample standard deviation of the squared errors / √trials
    double mse_stderr = 0.0;
    /// mean over trials of the average per-component gain
    double mean_gain = 0.0;
};

using TrialEstimator = std::function<EstimateResult(const Vector& y, const Vector& xls)>;

/// Monte Carlo MSE of several estimators at a fixed x.
///
/// Trial t draws its noise from RngStream(seed, t), and every estimator sees
/// the same draw. Squared errors are stored per trial and reduced in trial
/// order, so the result does not depend on `workers` (0 = hardware
/// concurrency). Requires trials >= 2. An estimator exception aborts the run
/// and is rethrown with the trial index attached.
std::vector<MseStats> monte_carlo(const Model& model, const Vector& x,
                                  std::span<const TrialEstimator> estimators, std::size_t trials,
                                  std::uint64_t seed, unsigned workers = 1);

std::vector<MseStats> monte_carlo(const Model& model, const Vector& x,
                                  std::span<const Estimator> estimators, std::size_t trials,
                                  std::uint64_t seed, unsigned workers = 1);

/// (mse_mean, mse_stderr) for one estimator.
std::pair<double, double> monte_carlo_mse(const Model& model, const Vector& x,
                                          const EstimatorSpec& spec, std::size_t trials,
                                          std::uint64_t seed, unsigned workers = 1);

/// Sum by recursive halving; deterministic for a given input order.
double pairwise_sum(std::span<const double> values);

/// (mean, sample std / √n) of `samples`, both via pairwise_sum.
std::pair<double, double> mean_and_stderr(std::span<const double> samples);

// --- experiments -------------------------------------------------------------

struct DirectionPolicy {
    enum class Kind {
        MaxEigenvector,  // eigenvector of Q⁻¹ with the largest eigenvalue: the noisiest direction
        MinEigenvector,  // eigenvector of Q⁻¹ with the smallest eigenvalue: the cleanest direction
        RandomSphere,    // `count` uniform unit vectors
        Explicit,        // `vector`, used as given (scaled to each SNR)
    };
    Kind kind = Kind::MaxEigenvector;
    std::size_t count = 0;
    Vector vector;
};

struct NamedDirection {
    std::string key;
    Vector direction;
};

/// Random directions use RngStream(seed, kDirectionStreamBase + i), disjoint
/// from the per-trial noise streams.
inline constexpr std::uint64_t kDirectionStreamBase = std::uint64_t{1} << 63;

std::vector<NamedDirection> resolve_directions(const Model& model,
                                               std::span<const DirectionPolicy> policies,
                                               std::uint64_t seed);

struct MseRow {
    std::string scenario;
    std::string estimator;
    double snr_db = 0.0;
    std::string sweep_key;
    double mse_mean = 0.0;
    double mse_stderr = 0.0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    /// ε₀ of the model the row was measured on; not part of the CSV.
    double eps0 = 0.0;
};

struct ExperimentConfig {
    /// Scenario name (see model_for_scenario) or "inline" when H/Cw are given.
    std::string scenario;
    Matrix H;  // inline only
    Matrix Cw; // inline only
    std::vector<EstimatorSpec> estimators;
    std::vector<double> snr_grid_db;
    std::vector<DirectionPolicy> directions;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
};

/// Throws Config when an invariant of ExperimentConfig is violated.
void validate(const ExperimentConfig& config);

/// Every (direction, snr) point with all estimators run on common noise.
/// Rows come back in canonical order (see sort_rows).
std::vector<MseRow> run_experiment(const Model& model, const ExperimentConfig& config,
                                   unsigned workers = 1);

/// Runs every (direction, snr) point for already-resolved directions. Rows are
/// labelled with `scenario` and the direction keys, in canonical order.
std::vector<MseRow> run_directions(const Model& model, const std::string& scenario,
                                   std::span<const NamedDirection> directions,
                                   std::span<const EstimatorSpec> estimators,
                                   std::span<const double> snr_grid_db, std::size_t trials,
                                   std::uint64_t seed, unsigned workers = 1);

/// Orders by scenario, estimator, snr (numeric), then sweep_key.
void sort_rows(std::vector<MseRow>& rows);

inline constexpr const char* kMseCsvHeader =
    "scenario,estimator,snr_db,sweep_key,mse_mean,mse_stderr,trials,seed";

std::string format_rows_csv(std::span<const MseRow> rows);

// --- Stein identity -------------------------------------------------------------

enum class SteinTestFunction {
    /// gᵢ(v̂) = v̂ᵢ / (c + v̂ᵀΣ⁻¹v̂)
    ShrinkageRatio,
    /// gᵢ(v̂) = v̂ᵢ, derivative 1
    Linear,
};

struct SteinCoordinate {
    double lhs_mean = 0.0;  // E[∂gᵢ/∂v̂ᵢ]
    double lhs_stderr = 0.0;
    double rhs_mean = 0.0;  // -E[gᵢ(v̂)(vᵢ - v̂ᵢ)]
    double rhs_stderr = 0.0;
    double discrepancy = 0.0;      // |lhs - rhs|
    double combined_stderr = 0.0;  // sqrt(lhs_stderr² + rhs_stderr²)
};

/// Monte Carlo check of E[∂gᵢ/∂v̂ᵢ] = -E[gᵢ(v̂)(vᵢ - v̂ᵢ)] for v̂ ~ N(v, I).
/// `sigma` is the diagonal of Σ (all > 0). Requires trials >= 10⁴; throws
/// DegenerateG for the shrinkage-ratio function when c = 0 and v = 0.
std::vector<SteinCoordinate> stein_lemma_check(const Vector& v, const Vector& sigma, double c,
                                               std::size_t trials, std::uint64_t seed,
                                               SteinTestFunction fn = SteinTestFunction::ShrinkageRatio);

}  // namespace blindmm
