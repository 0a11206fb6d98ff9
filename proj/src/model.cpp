#include "blindmm/model.hpp"

#include <cmath>

#include <fmt/format.h>

namespace blindmm {

namespace {

constexpr double kRelativeEigenFloor = 1e-12;

Matrix symmetrized(const Matrix& a) {
    Matrix s = a;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    return s;
}

}  // namespace

Model build_model(const Matrix& h, const Matrix& cw) {
    if (h.rows() == 0 || h.cols() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "H must be non-empty");
    }
    if (h.rows() < h.cols()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("H is {}x{}; need at least as many measurements as parameters",
                                h.rows(), h.cols()));
    }
    if (!cw.is_square() || cw.rows() != h.rows()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("Cw is {}x{} but H has {} rows", cw.rows(), cw.cols(), h.rows()));
    }
    if (!all_finite(h.values())) throw Error(ErrorCode::NonFinite, "H has NaN or Inf entries");

    Model model;
    model.h_ = h;
    model.cw_ = cw;
    model.cw_eig_ = sym_eig(cw);

    const auto& cw_vals = model.cw_eig_.eigenvalues;
    const double cw_max = cw_vals[0];
    const double cw_min = cw_vals[cw_vals.size() - 1];
    if (!(cw_max > 0.0) || cw_min <= kRelativeEigenFloor * cw_max) {
        throw Error(ErrorCode::NotPositiveDefinite,
                    fmt::format("Cw eigenvalues span [{}, {}]", cw_min, cw_max));
    }

    const Matrix cw_inv = psd_power(model.cw_eig_, -1.0);
    model.cw_sqrt_ = psd_power(model.cw_eig_, 0.5);
    model.ht_cw_inv_ = h.transpose() * cw_inv;
    model.q_ = symmetrized(model.ht_cw_inv_ * h);
    model.q_eig_ = sym_eig(model.q_);

    const auto& q_vals = model.q_eig_.eigenvalues;
    const double q_max = q_vals[0];
    const double q_min = q_vals[q_vals.size() - 1];
    if (!(q_max > 0.0) || q_min <= kRelativeEigenFloor * q_max) {
        throw Error(ErrorCode::RankDeficient,
                    fmt::format("Q = HᵀCw⁻¹H eigenvalues span [{}, {}]; H is not full column rank",
                                q_min, q_max));
    }

    model.ls_operator_ = psd_power(model.q_eig_, -1.0) * model.ht_cw_inv_;

    double eps0 = 0.0;
    for (double s : q_vals) eps0 += 1.0 / s;
    model.eps0_ = eps0;
    model.eps_max_ = 1.0 / q_min;
    model.trace_cw_ = trace(cw);
    return model;
}

Vector ls_estimate(const Model& model, const Vector& y) {
    if (y.size() != model.n()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("y has {} entries, model has n = {}", y.size(), model.n()));
    }
    return model.ls_operator() * y;
}

double effective_dimension(const Model& model) { return model.eps0() / model.eps_max(); }

double snr_of(const Model& model, const Vector& x) {
    if (x.size() != model.m()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("x has {} entries, model has m = {}", x.size(), model.m()));
    }
    return squared_norm(x) / model.trace_Cw();
}

Vector scale_to_snr(const Model& model, const Vector& direction, double snr_db) {
    if (direction.size() != model.m()) {
        throw Error(ErrorCode::DimensionMismatch,
                    fmt::format("direction has {} entries, model has m = {}", direction.size(),
                                model.m()));
    }
    const double norm2 = squared_norm(direction);
    if (norm2 == 0.0) throw Error(ErrorCode::ZeroDirection, "cannot scale a zero direction");
    const double target = std::pow(10.0, snr_db / 10.0) * model.trace_Cw();
    return std::sqrt(target / norm2) * direction;
}

}  // namespace blindmm
