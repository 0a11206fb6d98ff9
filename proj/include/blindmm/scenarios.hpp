#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "blindmm/model.hpp"
#include "blindmm/sim.hpp"

namespace blindmm {

// Built-in experiment setups. Every model here has H = I except the DCT
// one; SNR sweeps keep Cw fixed and rescale x (see scale_to_snr).

/// diag(1,1,1,1,.5,.2,.2,.2,.2,.1,.1,.1,.1,.05,.05); effective dimension 5.8.
Model scenario_fig4();
/// 15 noise variances linearly spaced from 1 down to 0.01; effective dimension 7.575.
Model scenario_fig5a();
/// Five variances of 1 and five of 0.1; effective dimension 5.5.
Model scenario_fig5b();
/// diag(1×5, (1/cond)×5), so that cond(Q) = cond.
Model scenario_fig6(double cond);
/// diag(100×5, 1×10): five measurements a hundred times noisier than the rest.
Model scenario_fig7();
/// H = I, Cw = I.
Model scenario_iid(std::size_t m);

/// Unit vector along the first (high-variance) coordinate of scenario_fig7.
Vector fig7_direction();

/// −10, −7.5, …, 20 dB.
std::vector<double> default_snr_grid();
/// 10^(i/2) for i = 0..6, i.e. 1 … 1000.
std::vector<double> condition_grid();

/// Orthonormal DCT-II: row k is sₖ·cos(π(t + ½)k/N), s₀ = √(1/N), sₖ = √(2/N).
Matrix dct_matrix(std::size_t n);

struct DctScenario {
    Model model;
    /// Smooth test signal scaled to the requested SNR.
    Vector signal;
    double snr_db = 5.0;
};

/// 100-sample signal observed through its DCT; the 10 highest-frequency
/// coefficients carry 1000× the noise variance of the other 90.
DctScenario scenario_fig2_dct(double snr_db = 5.0);

struct DctReport {
    std::size_t trials = 0;
    double snr_db = 0.0;
    double ls_mse = 0.0, ls_stderr = 0.0;
    double sbme_mse = 0.0, sbme_stderr = 0.0;
    double ebme_mse = 0.0, ebme_stderr = 0.0;
    /// SBME scalar gain: mean, min and max over draws.
    double sbme_gain_mean = 0.0, sbme_gain_min = 0.0, sbme_gain_max = 0.0;
    /// Per-draw smallest and largest EBME(b=-1) component gain, averaged over draws.
    double ebme_gain_min = 0.0, ebme_gain_max = 0.0;
    /// Whether, on every draw, EBME gains never increase with component noise variance.
    bool ebme_gain_monotone = true;
};

/// LS, SBME and EBME(b=-1) on `trials` noise draws (trial t uses RngStream(seed, t)).
DctReport dct_report(const DctScenario& scenario, std::size_t trials, std::uint64_t seed);

/// Model for a config `scenario` name: fig4, fig5a, fig5b, fig7, dct,
/// fig6:cond=<c>, iid:m=<m>, or one of the named scenarios below. Throws Config.
Model model_for_scenario(std::string_view name);

inline constexpr std::array<std::string_view, 7> kScenarioNames = {
    "fig2-dct", "fig3-pp", "fig4-snr", "fig5a-range", "fig5b-range", "fig6-cond", "fig7-tikhonov",
};

struct ScenarioOptions {
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    /// random directions for the fig5 envelopes
    std::size_t random_directions = 200;
};

struct ScenarioRun {
    std::vector<MseRow> rows;
    /// Extra human-readable lines (the DCT gain report); may be empty.
    std::string report;
};

/// Runs one of kScenarioNames with its default estimators and grids. Throws
/// Config listing the valid names for an unknown one.
ScenarioRun run_scenario(std::string_view name, const ScenarioOptions& options);

/// Appends, per (scenario, estimator, snr), rows keyed "envelope-min" and
/// "envelope-max" holding the smallest and largest mse_mean over directions.
void append_envelopes(std::vector<MseRow>& rows);

}  // namespace blindmm
