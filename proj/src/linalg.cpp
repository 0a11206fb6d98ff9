#include "blindmm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace blindmm {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonSymmetric: return "NonSymmetric";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::SingularPower: return "SingularPower";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::ZeroDirection: return "ZeroDirection";
        case ErrorCode::DegenerateG: return "DegenerateG";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Parse: return "Parse";
        case ErrorCode::Config: return "Config";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

namespace {

constexpr double kSymmetryTolerance = 1e-9;
constexpr double kOffDiagonalTolerance = 1e-12;
constexpr int kMaxSweeps = 100;

std::string shape(const Matrix& a) {
    return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(op) + ": " + shape(a) + " vs " + shape(b));
    }
}

void require_same_size(const Vector& a, const Vector& b, const char* op) {
    if (a.size() != b.size()) {
        throw Error(ErrorCode::DimensionMismatch, std::string(op) + ": " + std::to_string(a.size()) +
                                                      " vs " + std::to_string(b.size()));
    }
}

double off_diagonal_norm(const Matrix& a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            sum += a(i, j) * a(i, j);
        }
    }
    return std::sqrt(2.0 * sum);
}

// Zeroes a(p,q) with the rotation a <- Jᵀ·a·J and accumulates v <- v·J.
void rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
    const double apq = a(p, q);
    if (apq == 0.0) return;
    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    double t;
    if (std::abs(theta) > 1e150) {
        t = 0.5 / theta;
    } else {
        t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
    }
    const double c = 1.0 / std::sqrt(t * t + 1.0);
    const double s = t * c;
    const std::size_t n = a.rows();

    for (std::size_t k = 0; k < n; ++k) {
        const double akp = a(k, p);
        const double akq = a(k, q);
        a(k, p) = c * akp - s * akq;
        a(k, q) = s * akp + c * akq;
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double apk = a(p, k);
        const double aqk = a(q, k);
        a(p, k) = c * apk - s * aqk;
        a(q, k) = s * apk + c * aqk;
    }
    a(p, q) = 0.0;
    a(q, p) = 0.0;

    for (std::size_t k = 0; k < n; ++k) {
        const double vkp = v(k, p);
        const double vkq = v(k, q);
        v(k, p) = c * vkp - s * vkq;
        v(k, q) = s * vkp + c * vkq;
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "matrix data length " + std::to_string(data_.size()) + " != " +
                        std::to_string(rows_) + "x" + std::to_string(cols_));
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw Error(ErrorCode::DimensionMismatch, "ragged matrix literal");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

Vector Matrix::column(std::size_t j) const {
    Vector out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
    return out;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    }
    return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "matmul: " + shape(a) + " * " + shape(b));
    }
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

Vector operator*(const Matrix& a, const Vector& x) {
    if (a.cols() != x.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "matvec: " + shape(a) + " * " + std::to_string(x.size()));
    }
    Vector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto r = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

Vector transpose_times(const Matrix& a, const Vector& x) {
    if (a.rows() != x.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "transpose_times: " + shape(a) + "^T * " + std::to_string(x.size()));
    }
    Vector y(a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double xi = x[i];
        const auto r = a.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) y[j] += r[j] * xi;
    }
    return y;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix c = a;
    auto cv = c.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < cv.size(); ++i) cv[i] += bv[i];
    return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "subtract");
    Matrix c = a;
    auto cv = c.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < cv.size(); ++i) cv[i] -= bv[i];
    return c;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix c = a;
    for (double& v : c.values()) v *= s;
    return c;
}

Vector operator+(const Vector& a, const Vector& b) {
    require_same_size(a, b, "add");
    Vector c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
    return c;
}

Vector operator-(const Vector& a, const Vector& b) {
    require_same_size(a, b, "subtract");
    Vector c = a;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
    return c;
}

Vector operator*(double s, const Vector& a) {
    Vector c = a;
    for (double& v : c) v *= s;
    return c;
}

double dot(const Vector& a, const Vector& b) {
    require_same_size(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double squared_norm(const Vector& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    return std::sqrt(s);
}

double trace(const Matrix& a) {
    if (!a.is_square()) throw Error(ErrorCode::DimensionMismatch, "trace of " + shape(a));
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, i);
    return s;
}

bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

EigDecomp sym_eig(const Matrix& input) {
    if (!input.is_square() || input.rows() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "sym_eig needs a non-empty square matrix, got " +
                                                      shape(input));
    }
    if (!all_finite(input.values())) {
        throw Error(ErrorCode::NonFinite, "sym_eig input has NaN or Inf entries");
    }
    const std::size_t n = input.rows();
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double aij = input(i, j);
            const double aji = input(j, i);
            if (std::abs(aij - aji) > kSymmetryTolerance) {
                throw Error(ErrorCode::NonSymmetric, "entries (" + std::to_string(i) + "," +
                                                         std::to_string(j) + ") differ by " +
                                                         std::to_string(std::abs(aij - aji)));
            }
            a(i, j) = 0.5 * (aij + aji);
        }
    }

    Matrix v = Matrix::identity(n);
    const double threshold = kOffDiagonalTolerance * frobenius_norm(a);
    bool converged = false;
    for (int sweep = 0; sweep <= kMaxSweeps; ++sweep) {
        if (off_diagonal_norm(a) <= threshold) {
            converged = true;
            break;
        }
        if (sweep == kMaxSweeps) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) rotate(a, v, p, q);
        }
    }
    if (!converged) {
        throw Error(ErrorCode::NoConvergence, "Jacobi did not converge in 100 sweeps");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigDecomp out{Matrix(n, n), Vector(n)};
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        out.eigenvalues[c] = a(src, src);
        std::size_t lead = 0;
        for (std::size_t r = 1; r < n; ++r) {
            if (std::abs(v(r, src)) > std::abs(v(lead, src))) lead = r;
        }
        const double sign = v(lead, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < n; ++r) out.basis(r, c) = sign * v(r, src);
    }
    return out;
}

Matrix psd_power(const EigDecomp& e, double p) {
    const std::size_t n = e.size();
    if (p == 0.0) return Matrix::identity(n);

    double scale = 0.0;
    for (double l : e.eigenvalues) scale = std::max(scale, std::abs(l));
    const bool integer_power = std::floor(p) == p;

    std::vector<double> powered(n);
    for (std::size_t k = 0; k < n; ++k) {
        double l = e.eigenvalues[k];
        if (p < 0.0 && l <= 0.0) {
            throw Error(ErrorCode::SingularPower, "eigenvalue " + std::to_string(l) +
                                                      " raised to negative power " +
                                                      std::to_string(p));
        }
        if (l < 0.0 && !integer_power) {
            if (-l > 1e-12 * scale) {
                throw Error(ErrorCode::SingularPower,
                            "negative eigenvalue " + std::to_string(l) + " with fractional power");
            }
            l = 0.0;
        }
        powered[k] = std::pow(l, p);
    }

    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += e.basis(i, k) * powered[k] * e.basis(j, k);
            out(i, j) = s;
            out(j, i) = s;
        }
    }
    return out;
}

double quad_form(const Vector& x, const Matrix& t) {
    if (!t.is_square() || t.rows() != x.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "quad_form: vector of " + std::to_string(x.size()) + " with " + shape(t));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto r = t.row(i);
        double ti = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) ti += r[j] * x[j];
        s += x[i] * ti;
    }
    return s;
}

double condition_number(const EigDecomp& e) {
    if (e.size() == 0) throw Error(ErrorCode::DimensionMismatch, "empty decomposition");
    const double lmax = e.eigenvalues[0];
    const double lmin = e.eigenvalues[e.size() - 1];
    if (lmin <= 0.0) {
        throw Error(ErrorCode::SingularPower,
                    "condition number undefined for minimum eigenvalue " + std::to_string(lmin));
    }
    return lmax / lmin;
}

}  // namespace blindmm
