#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "blindmm/error.hpp"

namespace blindmm {

/// Dense real vector. Entries are expected to be finite; operations that
/// consume external data validate this explicitly.
class Vector {
public:
    Vector() = default;
    explicit Vector(std::size_t dim, double value = 0.0) : data_(dim, value) {}
    explicit Vector(std::vector<double> data) : data_(std::move(data)) {}
    Vector(std::initializer_list<double> values) : data_(values) {}

    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    const std::vector<double>& as_std() const noexcept { return data_; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    bool operator==(const Vector&) const = default;

private:
    std::vector<double> data_;
};

/// Dense real matrix stored row-major.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}
    /// Throws DimensionMismatch if data.size() != rows*cols.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> diag);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    Vector column(std::size_t j) const;
    Matrix transpose() const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Orthonormal eigenbasis (columns of `basis`) and eigenvalues in non-increasing order.
struct EigDecomp {
    Matrix basis;
    Vector eigenvalues;

    std::size_t size() const noexcept { return eigenvalues.size(); }
};

// Basic arithmetic. All throw DimensionMismatch on incompatible shapes.
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& x);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(double s, const Vector& a);

/// aᵀ·x without forming the transpose.
Vector transpose_times(const Matrix& a, const Vector& x);

double dot(const Vector& a, const Vector& b);
double squared_norm(const Vector& x);
double frobenius_norm(const Matrix& a);
double trace(const Matrix& a);

bool all_finite(std::span<const double> values);

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// The input must be square and symmetric to 1e-9 absolute per entry; it is
/// symmetrized as (A+Aᵀ)/2 before rotating. Sweeps stop once the
/// off-diagonal Frobenius norm is at most 1e-12·‖A‖_F (at most 100 sweeps).
/// Eigenvalues come back in non-increasing order with ties kept in diagonal
/// order, and each eigenvector is signed so that its largest-magnitude
/// component is positive. The result is a deterministic function of the input.
EigDecomp sym_eig(const Matrix& a);

/// basis·diag(λᵖ)·basisᵀ. p = 0 yields the exact identity.
/// Throws SingularPower for a non-positive eigenvalue with p < 0, or a
/// materially negative eigenvalue with non-integer p.
Matrix psd_power(const EigDecomp& e, double p);

/// xᵀ·T·x.
double quad_form(const Vector& x, const Matrix& t);

/// λ_max / λ_min. Throws SingularPower if λ_min <= 0.
double condition_number(const EigDecomp& e);

}  // namespace blindmm
