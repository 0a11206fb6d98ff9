#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "blindmm/csv.hpp"
#include "blindmm/linalg.hpp"

using namespace blindmm;

namespace {

Matrix random_symmetric(std::mt19937_64& gen, std::size_t m) {
    std::normal_distribution<double> n01;
    Matrix a(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            a(i, j) = a(j, i) = n01(gen);
        }
    }
    return a;
}

Matrix random_spd(std::mt19937_64& gen, std::size_t m) {
    const Matrix a = random_symmetric(gen, m);
    return a * a + Matrix::identity(m);
}

Eigen::MatrixXd to_eigen(const Matrix& a) {
    Eigen::MatrixXd out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
    return out;
}

double rel_diff(const Matrix& a, const Matrix& b) { return frobenius_norm(a - b) / frobenius_norm(b); }

Matrix reconstruct(const EigDecomp& e) {
    return e.basis * Matrix::diagonal(e.eigenvalues.values()) * e.basis.transpose();
}

}  // namespace

TEST_CASE("sym_eig on hand-checked matrices") {
    SUBCASE("identity") {
        const auto e = sym_eig(Matrix::identity(3));
        for (double v : e.eigenvalues) CHECK(v == doctest::Approx(1.0));
        CHECK(rel_diff(reconstruct(e), Matrix::identity(3)) < 1e-12);
    }
    SUBCASE("diagonal gives a permutation of the axes") {
        const double d[] = {4, 9, 1};
        const auto e = sym_eig(Matrix::diagonal(d));
        CHECK(e.eigenvalues == Vector{9, 4, 1});
        CHECK(e.basis(1, 0) == 1.0);
        CHECK(e.basis(0, 1) == 1.0);
        CHECK(e.basis(2, 2) == 1.0);
    }
    SUBCASE("2x2 with known roots") {
        const auto e = sym_eig(Matrix{{2, 1}, {1, 2}});
        CHECK(e.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-14));
        CHECK(e.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-14));
        const double r = 1.0 / std::sqrt(2.0);
        CHECK(std::abs(e.basis(0, 0)) == doctest::Approx(r));
        CHECK(e.basis(0, 0) * e.basis(1, 0) > 0);
        CHECK(e.basis(0, 1) * e.basis(1, 1) < 0);
    }
}

TEST_CASE("sym_eig rejects bad input") {
    auto code_of = [](const Matrix& a) {
        try {
            sym_eig(a);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Io;
    };
    CHECK(code_of(Matrix{{1, 2}, {2.1, 1}}) == ErrorCode::NonSymmetric);
    CHECK(code_of(Matrix{{1, NAN}, {NAN, 1}}) == ErrorCode::NonFinite);
    CHECK(code_of(Matrix(2, 3)) == ErrorCode::DimensionMismatch);
    // within tolerance: accepted and symmetrized
    CHECK_NOTHROW(sym_eig(Matrix{{1, 2}, {2 + 5e-10, 1}}));
}

TEST_CASE("sym_eig matches Eigen and reconstructs over 1000 random matrices") {
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t m = 2 + trial % 11;
        const Matrix a = random_symmetric(gen, m);
        const auto e = sym_eig(a);

        CHECK(rel_diff(reconstruct(e), a) <= 1e-8);
        CHECK(frobenius_norm(e.basis.transpose() * e.basis - Matrix::identity(m)) <= 1e-10 * m);
        for (std::size_t i = 1; i < m; ++i) CHECK(e.eigenvalues[i - 1] >= e.eigenvalues[i]);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle(to_eigen(a));
        const auto& ev = oracle.eigenvalues();  // ascending
        const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
        for (std::size_t i = 0; i < m; ++i) {
            CHECK(std::abs(e.eigenvalues[i] - ev(static_cast<Eigen::Index>(m - 1 - i))) <= 1e-10 * scale);
        }
    }
}

TEST_CASE("sym_eig is deterministic and signs eigenvectors") {
    std::mt19937_64 gen(7);
    const Matrix a = random_symmetric(gen, 8);
    const auto e1 = sym_eig(a);
    const auto e2 = sym_eig(a);
    CHECK(e1.eigenvalues == e2.eigenvalues);
    CHECK(e1.basis == e2.basis);
    for (std::size_t j = 0; j < 8; ++j) {
        double best = 0.0;
        for (std::size_t i = 0; i < 8; ++i) {
            if (std::abs(e1.basis(i, j)) > std::abs(best)) best = e1.basis(i, j);
        }
        CHECK(best > 0.0);
    }
}

TEST_CASE("psd_power") {
    const double d[] = {4, 9};
    const auto e = sym_eig(Matrix::diagonal(d));
    CHECK(rel_diff(psd_power(e, 0.5), Matrix{{2, 0}, {0, 3}}) < 1e-15);
    CHECK(psd_power(e, 0.0) == Matrix::identity(2));

    const auto e2 = sym_eig(Matrix{{2, 1}, {1, 2}});
    CHECK(rel_diff(psd_power(e2, -1.0), Matrix{{2.0 / 3, -1.0 / 3}, {-1.0 / 3, 2.0 / 3}}) < 1e-14);
    CHECK(rel_diff(psd_power(e2, 1.0), Matrix{{2, 1}, {1, 2}}) < 1e-14);

    const double sing[] = {1, 0};
    CHECK_THROWS_AS(psd_power(sym_eig(Matrix::diagonal(sing)), -1.0), Error);
    CHECK_NOTHROW(psd_power(sym_eig(Matrix::diagonal(sing)), 0.5));
}

TEST_CASE("psd_power composition and trace of the inverse") {
    std::mt19937_64 gen(3);
    const double exps[] = {-1.0, -0.5, 0.5, 1.0};
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 2 + trial % 11;
        const auto e = sym_eig(random_spd(gen, m));
        for (double a : exps) {
            for (double b : exps) {
                CHECK(rel_diff(psd_power(e, a) * psd_power(e, b), psd_power(e, a + b)) <= 1e-8);
            }
        }
        double inv_sum = 0.0;
        for (double s : e.eigenvalues) inv_sum += 1.0 / s;
        CHECK(trace(psd_power(e, -1.0)) == doctest::Approx(inv_sum).epsilon(1e-10));
    }
}

TEST_CASE("quad_form") {
    CHECK(quad_form(Vector{3, 4}, Matrix::identity(2)) == 25.0);
    CHECK(quad_form(Vector{0, 0}, Matrix{{2, 1}, {1, 2}}) == 0.0);
    CHECK(quad_form(Vector{1, 2}, Matrix{{2, 1}, {1, 2}}) == 14.0);
    CHECK_THROWS_AS(quad_form(Vector{1, 2, 3}, Matrix::identity(2)), Error);

    std::mt19937_64 gen(11);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 2 + trial % 11;
        const Matrix t = random_spd(gen, m);
        Vector x(m);
        for (double& v : x) v = n01(gen);
        const double q = quad_form(x, t);
        CHECK(q >= 0.0);
        CHECK(q == doctest::Approx(squared_norm(psd_power(sym_eig(t), 0.5) * x)).epsilon(1e-9));
    }
}

TEST_CASE("condition_number") {
    CHECK(condition_number(sym_eig(Matrix::identity(4))) == 1.0);
    const double d1[] = {1000, 1};
    CHECK(condition_number(sym_eig(Matrix::diagonal(d1))) == doctest::Approx(1000.0));
    const double d2[] = {1, 0.1, 1, 0.1, 1, 0.1};
    CHECK(condition_number(sym_eig(Matrix::diagonal(d2))) == doctest::Approx(10.0));
    const double d3[] = {1, 0};
    CHECK_THROWS_AS(condition_number(sym_eig(Matrix::diagonal(d3))), Error);
}

TEST_CASE("csv parsing") {
    const Matrix a = parse_matrix_csv("1,2\n3,4\n\n");
    CHECK(a == Matrix{{1, 2}, {3, 4}});
    CHECK(parse_vector_csv("1\n2.5\n-3e-2\n") == Vector{1, 2.5, -0.03});
    CHECK_THROWS_AS(parse_matrix_csv("1,2\n3\n"), Error);
    CHECK_THROWS_AS(parse_matrix_csv("1,x\n"), Error);
    CHECK_THROWS_AS(parse_vector_csv("1,2\n"), Error);
    CHECK_THROWS_AS(parse_matrix_csv("1,inf\n"), Error);

    const Matrix b{{0.1, 1.0 / 3.0}, {-2e-300, 12345.678}};
    CHECK(parse_matrix_csv(format_matrix_csv(b)) == b);
    const Vector v{0.1, 2.0 / 7.0};
    CHECK(parse_vector_csv(format_vector_csv(v)) == v);
}
