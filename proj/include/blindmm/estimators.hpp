#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "blindmm/estimator_spec.hpp"
#include "blindmm/linalg.hpp"
#include "blindmm/model.hpp"

namespace blindmm {

/// Output of one estimator on one measurement.
///
/// `shrinkage` holds the gain applied to each spectral component of x̂_LS, in
/// the order of model.Q_eig() (descending eigenvalues of Q). Scalar-shrinkage
/// rules report a constant vector and LS reports ones. `degenerate` is set when
/// the rule is undefined at x̂_LS = 0 and the zero vector was returned instead.
struct EstimateResult {
    Vector xhat;
    Vector shrinkage;
    bool degenerate = false;
};

EstimateResult least_squares(const Model& model, const Vector& y);

/// ‖x̂‖²/(‖x̂‖² + ε₀)·x̂ for x̂ = x̂_LS.
EstimateResult sbme(const Model& model, const Vector& xls);

/// (1 - ε₀/(c + ‖x̂_LS‖²))·x̂_LS. Requires c >= 0 (InvalidArgument otherwise).
/// c = 0 with x̂_LS = 0 returns zero, flagged degenerate.
EstimateResult shrink_c(const Model& model, const Vector& xls, double c);

/// g·x̂_LS + (1-g)·x0 with the SBME gain g.
EstimateResult off_center_sbme(const Model& model, const Vector& xls, const Vector& x0);

/// (1 - ε₀/‖x̂_LS‖²)·x̂_LS; the gain may be negative.
EstimateResult balanced_bme(const Model& model, const Vector& xls);

/// (1 - ε₀/‖x̂_LS‖²)₊·x̂_LS.
EstimateResult positive_part_bme(const Model& model, const Vector& xls);

/// (1 - (ε₀/ε_max - 2)/‖x̂_LS‖²_Q)·x̂_LS.
EstimateResult bock(const Model& model, const Vector& xls);

/// (Q + m/‖x̂_LS‖²·I)⁻¹·Hᵀ·Cw⁻¹·y.
EstimateResult tikhonov1(const Model& model, const Vector& y);
/// ‖x̂_LS‖²_Q/(m + ‖x̂_LS‖²_Q)·x̂_LS.
EstimateResult tikhonov2(const Model& model, const Vector& y);

/// Ellipsoidal blind minimax estimator for the set {x : xᵀQᵇx <= ‖x̂_LS‖²_{Qᵇ}}.
///
/// Q's eigenvalues are visited in non-increasing σᵇ order. For the smallest k
/// with α·σ_{k+1}^{b/2} < 1, where
///     α  = r₁ / (‖x̂_LS‖²_{Qᵇ} + r₂),
///     r₁ = Σ_{i>k} σᵢ^{b/2-1},   r₂ = Σ_{i>k} σᵢ^{b-1},
/// the estimate is V·diag((1 - α σᵢ^{b/2})₊)·Vᵀ·x̂_LS. The first k gains are
/// exactly the clamped ones.
class EbmeKernel {
public:
    EbmeKernel(const Model& model, double b);

    struct Solution {
        double alpha = 0.0;
        std::size_t k = 0;
        double radius2 = 0.0;  // ‖x̂_LS‖²_{Qᵇ}
        double r1 = 0.0;
        double r2 = 0.0;
    };

    /// α and k for the given spectral coefficients z = Vᵀ·x̂_LS.
    Solution solve(const Vector& z) const;

    /// Clamped estimate. Pass clamp=false for the unclamped (I - αQ^{b/2})·x̂_LS
    /// rule that the clamped form improves upon (same α and k).
    EstimateResult apply(const Vector& xls, bool clamp = true) const;

    double b() const noexcept { return b_; }
    /// Eigen-indices (into model.Q_eig()) in σᵇ-descending order.
    const std::vector<std::size_t>& order() const noexcept { return order_; }

private:
    const Model* model_;
    double b_;
    std::vector<std::size_t> order_;
    std::vector<double> pow_b_;       // σᵇ
    std::vector<double> pow_half_b_;  // σ^{b/2}
    std::vector<double> pow_r1_;      // σ^{b/2-1}
    std::vector<double> pow_r2_;      // σ^{b-1}
};

EstimateResult ebme(const Model& model, const Vector& xls, double b);
EstimateResult ebme_unclamped(const Model& model, const Vector& xls, double b);

/// ε₀/ε_max > 4, evaluated as ε₀ > 4·ε_max.
bool sbme_dominance_holds(const Model& model);
/// trace(Q^{b/2-1}) > 4·λ_max(Q^{b/2-1}).
bool ebme_dominance_holds(const Model& model, double b);

/// An EstimatorSpec bound to a model, with per-model constants precomputed.
/// Holds a reference to the model, which must outlive it.
class Estimator {
public:
    Estimator(EstimatorSpec spec, const Model& model);

    /// Evaluates on one measurement. `xls` must equal ls_estimate(model, y).
    EstimateResult apply(const Vector& y, const Vector& xls) const;

    const EstimatorSpec& spec() const noexcept { return spec_; }
    const std::string& label() const noexcept { return label_; }

private:
    EstimatorSpec spec_;
    const Model* model_;
    std::string label_;
    std::vector<EbmeKernel> ebme_;  // populated for spec::Ebme only
};

/// Convenience: computes x̂_LS from y and applies `spec`.
EstimateResult estimate(const Model& model, const EstimatorSpec& spec, const Vector& y);

}  // namespace blindmm
