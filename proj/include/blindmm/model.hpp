#pragma once

#include <cstddef>

#include "blindmm/linalg.hpp"

namespace blindmm {

/// Validated linear Gaussian model y = H·x + w, w ~ N(0, Cw), with every
/// spectral quantity the estimators need computed once at construction.
/// Immutable and safe to share across threads.
class Model {
public:
    const Matrix& H() const noexcept { return h_; }
    const Matrix& Cw() const noexcept { return cw_; }
    /// Hᵀ·Cw⁻¹·H, the inverse covariance of the LS estimate.
    const Matrix& Q() const noexcept { return q_; }
    const EigDecomp& Q_eig() const noexcept { return q_eig_; }
    const EigDecomp& Cw_eig() const noexcept { return cw_eig_; }
    /// PSD square root of Cw, used to colour white noise.
    const Matrix& Cw_sqrt() const noexcept { return cw_sqrt_; }
    /// Hᵀ·Cw⁻¹ (m×n).
    const Matrix& Ht_Cw_inv() const noexcept { return ht_cw_inv_; }
    /// Q⁻¹·Hᵀ·Cw⁻¹ (m×n), maps y to the LS estimate.
    const Matrix& ls_operator() const noexcept { return ls_operator_; }

    /// MSE of the LS estimator, trace(Q⁻¹).
    double eps0() const noexcept { return eps0_; }
    /// Largest eigenvalue of Q⁻¹.
    double eps_max() const noexcept { return eps_max_; }
    double trace_Cw() const noexcept { return trace_cw_; }

    std::size_t n() const noexcept { return h_.rows(); }
    std::size_t m() const noexcept { return h_.cols(); }

private:
    friend Model build_model(const Matrix& h, const Matrix& cw);

    Matrix h_;
    Matrix cw_;
    Matrix q_;
    EigDecomp q_eig_;
    EigDecomp cw_eig_;
    Matrix cw_sqrt_;
    Matrix ht_cw_inv_;
    Matrix ls_operator_;
    double eps0_ = 0.0;
    double eps_max_ = 0.0;
    double trace_cw_ = 0.0;
};

/// Validates (H, Cw) and precomputes Q, its eigendecomposition, ε₀ and ε_max.
///
/// Errors: DimensionMismatch (shapes, or n < m), NotPositiveDefinite (Cw has an
/// eigenvalue <= 1e-12 of its largest), RankDeficient (same relative test on Q),
/// NonSymmetric / NonFinite from the eigensolver.
Model build_model(const Matrix& h, const Matrix& cw);

/// Q⁻¹·Hᵀ·Cw⁻¹·y.
Vector ls_estimate(const Model& model, const Vector& y);

/// ε₀ / ε_max: roughly the number of independently measured parameters.
double effective_dimension(const Model& model);

/// ‖x‖² / trace(Cw).
double snr_of(const Model& model, const Vector& x);

/// Rescales `direction` so that snr_of(result) = 10^(snr_db/10).
/// Throws ZeroDirection for a zero direction.
Vector scale_to_snr(const Model& model, const Vector& direction, double snr_db);

}  // namespace blindmm
