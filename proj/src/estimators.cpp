#include "blindmm/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace blindmm {

namespace {

void require_param_dim(const Model& model, const Vector& v, const char* what) {
    if (v.size() != model.m()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("{} has {} entries, model has m = {}", what, v.size(), model.m()));
    }
}

EstimateResult scalar(const Vector& xls, double gain) {
    return {gain * xls, Vector(xls.size(), gain), false};
}

EstimateResult degenerate_zero(std::size_t m) { return {Vector(m), Vector(m), true}; }

/// Vᵀ·v in the eigenbasis of Q.
Vector to_eigenbasis(const Model& model, const Vector& v) {
    return transpose_times(model.Q_eig().basis, v);
}

EstimateResult tikhonov1_impl(const Model& model, const Vector& y, const Vector& xls) {
    const double norm2 = squared_norm(xls);
    const std::size_t m = model.m();
    if (norm2 == 0.0) return degenerate_zero(m);
    const double lambda = static_cast<double>(m) / norm2;

    const auto& eig = model.Q_eig();
    const Vector z = to_eigenbasis(model, model.Ht_Cw_inv() * y);
    Vector coeff(m);
    Vector gains(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double s = eig.eigenvalues[i];
        coeff[i] = z[i] / (s + lambda);
        gains[i] = s / (s + lambda);
    }
    return {eig.basis * coeff, std::move(gains), false};
}

EstimateResult tikhonov2_impl(const Model& model, const Vector& xls) {
    const double qnorm2 = quad_form(xls, model.Q());
    if (qnorm2 == 0.0) return degenerate_zero(model.m());
    return scalar(xls, qnorm2 / (static_cast<double>(model.m()) + qnorm2));
}

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

EstimateResult least_squares(const Model& model, const Vector& y) {
    return {ls_estimate(model, y), Vector(model.m(), 1.0), false};
}

EstimateResult sbme(const Model& model, const Vector& xls) {
    require_param_dim(model, xls, "x_ls");
    const double norm2 = squared_norm(xls);
    return scalar(xls, norm2 / (norm2 + model.eps0()));
}

EstimateResult shrink_c(const Model& model, const Vector& xls, double c) {
    require_param_dim(model, xls, "x_ls");
    if (!(c >= 0.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("c = {} must be >= 0", c));
    const double norm2 = squared_norm(xls);
    const double denom = c + norm2;
    if (denom == 0.0) return degenerate_zero(model.m());
    // (c - ε₀ + ‖x‖²)/(c + ‖x‖²) rather than 1 - ε₀/(c + ‖x‖²): no cancellation for small gains
    return scalar(xls, ((c - model.eps0()) + norm2) / denom);
}

EstimateResult off_center_sbme(const Model& model, const Vector& xls, const Vector& x0) {
    require_param_dim(model, xls, "x_ls");
    require_param_dim(model, x0, "x0");
    const double norm2 = squared_norm(xls);
    const double g = norm2 / (norm2 + model.eps0());
    const double h = model.eps0() / (norm2 + model.eps0());
    Vector xhat(model.m());
    for (std::size_t i = 0; i < xhat.size(); ++i) xhat[i] = g * xls[i] + h * x0[i];
    return {std::move(xhat), Vector(model.m(), g), false};
}

EstimateResult balanced_bme(const Model& model, const Vector& xls) {
    require_param_dim(model, xls, "x_ls");
    const double norm2 = squared_norm(xls);
    if (norm2 == 0.0) return degenerate_zero(model.m());
    return scalar(xls, (-model.eps0() + norm2) / norm2);
}

EstimateResult positive_part_bme(const Model& model, const Vector& xls) {
    require_param_dim(model, xls, "x_ls");
    const double norm2 = squared_norm(xls);
    if (norm2 == 0.0) return scalar(xls, 0.0);
    return scalar(xls, std::max(0.0, (-model.eps0() + norm2) / norm2));
}

EstimateResult bock(const Model& model, const Vector& xls) {
    require_param_dim(model, xls, "x_ls");
    const double qnorm2 = quad_form(xls, model.Q());
    if (qnorm2 == 0.0) return degenerate_zero(model.m());
    const double numerator = model.eps0() / model.eps_max() - 2.0;
    return scalar(xls, 1.0 - numerator / qnorm2);
}

EstimateResult tikhonov1(const Model& model, const Vector& y) {
    return tikhonov1_impl(model, y, ls_estimate(model, y));
}

EstimateResult tikhonov2(const Model& model, const Vector& y) {
    return tikhonov2_impl(model, ls_estimate(model, y));
}

// --- ellipsoidal ------------------------------------------------------------

EbmeKernel::EbmeKernel(const Model& model, double b) : model_(&model), b_(b) {
    if (!std::isfinite(b)) throw Error(ErrorCode::InvalidArgument, "EBME exponent must be finite");
    const auto& sigma = model.Q_eig().eigenvalues;
    const std::size_t m = sigma.size();

    std::vector<double> by_index(m);
    for (std::size_t i = 0; i < m; ++i) by_index[i] = std::pow(sigma[i], b);
    order_.resize(m);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t i, std::size_t j) { return by_index[i] > by_index[j]; });

    pow_b_.resize(m);
    pow_half_b_.resize(m);
    pow_r1_.resize(m);
    pow_r2_.resize(m);
    for (std::size_t pos = 0; pos < m; ++pos) {
        const double s = sigma[order_[pos]];
        pow_b_[pos] = by_index[order_[pos]];
        pow_half_b_[pos] = std::pow(s, b / 2.0);
        pow_r1_[pos] = std::pow(s, b / 2.0 - 1.0);
        pow_r2_[pos] = std::pow(s, b - 1.0);
    }
}

EbmeKernel::Solution EbmeKernel::solve(const Vector& z) const {
    const std::size_t m = order_.size();
    Solution sol;
    for (std::size_t pos = 0; pos < m; ++pos) {
        const double zi = z[order_[pos]];
        sol.radius2 += pow_b_[pos] * zi * zi;
    }
    for (std::size_t k = 0; k < m; ++k) {
        double r1 = 0.0;
        double r2 = 0.0;
        for (std::size_t i = k; i < m; ++i) {
            r1 += pow_r1_[i];
            r2 += pow_r2_[i];
        }
        sol.alpha = r1 / (sol.radius2 + r2);
        sol.k = k;
        sol.r1 = r1;
        sol.r2 = r2;
        if (sol.alpha * pow_half_b_[k] < 1.0) break;
    }
    return sol;
}

EstimateResult EbmeKernel::apply(const Vector& xls, bool clamp) const {
    const Model& model = *model_;
    require_param_dim(model, xls, "x_ls");
    const std::size_t m = model.m();
    if (squared_norm(xls) == 0.0) return {Vector(m), Vector(m), false};

    const Vector z = to_eigenbasis(model, xls);
    const Solution sol = solve(z);

    Vector gains(m);
    Vector coeff(m);
    for (std::size_t pos = 0; pos < m; ++pos) {
        const std::size_t idx = order_[pos];
        // 1 - α·σ^{b/2} over the common denominator L² + r₂
        const double denom = sol.radius2 + sol.r2;
        double g = (sol.radius2 + (sol.r2 - sol.r1 * pow_half_b_[pos])) / denom;
        if (clamp) g = std::max(0.0, g);
        gains[idx] = g;
        coeff[idx] = g * z[idx];
    }
    return {model.Q_eig().basis * coeff, std::move(gains), false};
}

EstimateResult ebme(const Model& model, const Vector& xls, double b) {
    return EbmeKernel(model, b).apply(xls, true);
}

EstimateResult ebme_unclamped(const Model& model, const Vector& xls, double b) {
    return EbmeKernel(model, b).apply(xls, false);
}

bool sbme_dominance_holds(const Model& model) { return model.eps0() > 4.0 * model.eps_max(); }

bool ebme_dominance_holds(const Model& model, double b) {
    const double p = b / 2.0 - 1.0;
    double tr = 0.0;
    double lmax = 0.0;
    for (double s : model.Q_eig().eigenvalues) {
        const double v = std::pow(s, p);
        tr += v;
        lmax = std::max(lmax, v);
    }
    return tr > 4.0 * lmax;
}

// --- dispatch ---------------------------------------------------------------

Estimator::Estimator(EstimatorSpec spec, const Model& model)
    : spec_(std::move(spec)), model_(&model), label_(estimator_label(spec_)) {
    if (const auto* e = std::get_if<spec::Ebme>(&spec_)) ebme_.emplace_back(model, e->b);
    if (const auto* o = std::get_if<spec::OffCenterSbme>(&spec_)) require_param_dim(model, o->x0, "x0");
    if (const auto* c = std::get_if<spec::ShrinkC>(&spec_); c && !(c->c >= 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "shrinkc needs c >= 0");
    }
}

EstimateResult Estimator::apply(const Vector& y, const Vector& xls) const {
    const Model& model = *model_;
    return std::visit(
        overloaded{
            [&](const spec::Ls&) { return EstimateResult{xls, Vector(model.m(), 1.0), false}; },
            [&](const spec::Sbme&) { return sbme(model, xls); },
            [&](const spec::ShrinkC& s) { return shrink_c(model, xls, s.c); },
            [&](const spec::OffCenterSbme& s) { return off_center_sbme(model, xls, s.x0); },
            [&](const spec::Ebme&) { return ebme_.front().apply(xls, true); },
            [&](const spec::BalancedBme&) { return balanced_bme(model, xls); },
            [&](const spec::PositivePartBme&) { return positive_part_bme(model, xls); },
            [&](const spec::Bock&) { return bock(model, xls); },
            [&](const spec::Tikhonov1&) { return tikhonov1_impl(model, y, xls); },
            [&](const spec::Tikhonov2&) { return tikhonov2_impl(model, xls); },
        },
        spec_);
}

EstimateResult estimate(const Model& model, const EstimatorSpec& spec, const Vector& y) {
    const Vector xls = ls_estimate(model, y);
    return Estimator(spec, model).apply(y, xls);
}

}  // namespace blindmm
