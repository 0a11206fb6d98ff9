#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "blindmm/estimators.hpp"
#include "blindmm/scenarios.hpp"

using namespace blindmm;

namespace {

Model iid(std::size_t m) { return build_model(Matrix::identity(m), Matrix::identity(m)); }

Model random_model(std::mt19937_64& gen, std::size_t m) {
    std::normal_distribution<double> n01;
    std::uniform_int_distribution<std::size_t> extra(0, 3);
    const std::size_t n = m + extra(gen);
    Matrix h(n, m);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) h(i, j) = n01(gen);
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = n01(gen);
    return build_model(h, a * a.transpose() + 0.1 * Matrix::identity(n));
}

Vector random_vector(std::mt19937_64& gen, std::size_t m, double scale) {
    std::normal_distribution<double> n01;
    Vector v(m);
    for (double& x : v) x = scale * n01(gen);
    return v;
}

double rel_err(const Vector& a, const Vector& b) {
    const double denom = std::max(std::sqrt(squared_norm(b)), 1e-300);
    return std::sqrt(squared_norm(a - b)) / denom;
}

Eigen::MatrixXd to_eigen(const Matrix& a) {
    Eigen::MatrixXd out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
    return out;
}

/// Independent EBME evaluation on Eigen's eigendecomposition, with every
/// candidate k examined so the smallest admissible one can be confirmed.
struct EbmeOracle {
    Vector xhat;
    double alpha = 0.0;
    std::size_t k = 0;
};

EbmeOracle ebme_oracle(const Model& model, const Vector& xls, double b) {
    const std::size_t m = model.m();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(model.Q()));
    const Eigen::VectorXd sigma = es.eigenvalues();
    const Eigen::MatrixXd v = es.eigenvectors();
    Eigen::VectorXd x(m);
    for (std::size_t i = 0; i < m; ++i) x(i) = xls[i];
    const Eigen::VectorXd z = v.transpose() * x;

    std::vector<Eigen::Index> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = static_cast<Eigen::Index>(i);
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) {
        return std::pow(sigma(i), b) > std::pow(sigma(j), b);
    });
    double l2 = 0.0;
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) l2 += std::pow(sigma(i), b) * z(i) * z(i);

    EbmeOracle out;
    bool found = false;
    for (std::size_t k = 0; k < m && !found; ++k) {
        double r1 = 0.0, r2 = 0.0;
        for (std::size_t p = k; p < m; ++p) {
            r1 += std::pow(sigma(order[p]), b / 2 - 1);
            r2 += std::pow(sigma(order[p]), b - 1);
        }
        const double alpha = r1 / (l2 + r2);
        if (alpha * std::pow(sigma(order[k]), b / 2) < 1.0) {
            out.alpha = alpha;
            out.k = k;
            found = true;
        }
    }
    REQUIRE(found);
    Eigen::VectorXd g(m);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(m); ++i) {
        g(i) = std::max(0.0, 1.0 - out.alpha * std::pow(sigma(i), b / 2));
    }
    const Eigen::VectorXd xh = v * g.cwiseProduct(z);
    out.xhat = Vector(std::vector<double>(xh.data(), xh.data() + m));
    return out;
}

bool all_equal(const Vector& v) {
    return std::all_of(v.begin(), v.end(), [&](double g) { return g == v[0]; });
}

}  // namespace

TEST_CASE("sbme examples") {
    const Model m = iid(5);
    const auto r = sbme(m, Vector{3, 0, 0, 0, 4});
    CHECK(r.shrinkage[0] == doctest::Approx(25.0 / 30.0).epsilon(1e-15));
    CHECK(rel_err(r.xhat, Vector{2.5, 0, 0, 0, 10.0 / 3.0}) < 1e-15);
    CHECK(all_equal(r.shrinkage));

    CHECK(sbme(m, Vector(5)).xhat == Vector(5));
    CHECK_FALSE(sbme(m, Vector(5)).degenerate);
    const Vector half{1, 1, 1, 1, 1};  // ‖x‖² = ε₀
    CHECK(sbme(m, half).shrinkage[0] == doctest::Approx(0.5));
}

TEST_CASE("shrink_c examples") {
    const Model m = iid(5);
    const Vector xls{2, 0, 0, 0, 0};  // ‖x‖² = 4
    const auto r = shrink_c(m, xls, 1.0);
    CHECK(r.shrinkage[0] == doctest::Approx(0.0));
    CHECK(std::sqrt(squared_norm(r.xhat)) < 1e-15);
    CHECK_THROWS_AS(shrink_c(m, xls, -1.0), Error);
    const auto z = shrink_c(m, Vector(5), 0.0);
    CHECK(z.degenerate);
    CHECK(z.xhat == Vector(5));
}

TEST_CASE("off_center_sbme examples") {
    const Model m = iid(4);
    const Vector x0{1, 2, 3, 4};
    CHECK(off_center_sbme(m, Vector(4), x0).xhat == x0);
    const Vector xls{1, 1, 1, 1};  // ‖x‖² = ε₀ → g = 1/2
    CHECK(rel_err(off_center_sbme(m, xls, 2.0 * xls).xhat, 1.5 * xls) < 1e-15);
    CHECK_THROWS_AS(off_center_sbme(m, xls, Vector{1, 2}), Error);
}

TEST_CASE("balanced and positive-part BME examples") {
    const Model m = iid(4);
    const Vector at_eps0{1, 1, 1, 1};
    CHECK(std::sqrt(squared_norm(balanced_bme(m, at_eps0).xhat)) < 1e-15);
    const Vector half = std::sqrt(0.5) * at_eps0;  // ‖x‖² = ε₀/2
    const auto bb = balanced_bme(m, half);
    CHECK(bb.shrinkage[0] == doctest::Approx(-1.0));
    CHECK(rel_err(bb.xhat, -1.0 * half) < 1e-14);
    CHECK(balanced_bme(m, 1e6 * at_eps0).shrinkage[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(balanced_bme(m, Vector(4)).degenerate);

    CHECK(positive_part_bme(m, half).xhat == Vector(4));
    CHECK(positive_part_bme(m, std::sqrt(2.0) * at_eps0).shrinkage[0] == doctest::Approx(0.5));
    CHECK(positive_part_bme(m, Vector(4)).xhat == Vector(4));
    CHECK_FALSE(positive_part_bme(m, Vector(4)).degenerate);
}

TEST_CASE("bock examples") {
    const Model m = iid(5);
    const auto r = bock(m, Vector{3, 4, 0, 0, 0});  // ‖x‖²_Q = 25
    CHECK(r.shrinkage[0] == doctest::Approx(0.88).epsilon(1e-15));
    CHECK(bock(m, Vector(5)).degenerate);

    // ε₀/ε_max = 2: numerator vanishes
    const double d[] = {1, 1};
    const Model two = build_model(Matrix::identity(2), Matrix::diagonal(d));
    CHECK(bock(two, Vector{0.3, -0.2}).shrinkage[0] == doctest::Approx(1.0));
    CHECK(bock(m, Vector{1e8, 0, 0, 0, 0}).shrinkage[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("tikhonov examples") {
    const Model one = iid(1);
    const auto t2 = tikhonov2(one, Vector{2});
    CHECK(t2.xhat[0] == doctest::Approx(1.6).epsilon(1e-15));

    const Model m = iid(3);
    const Vector y{1, -2, 0.5};
    const double ny = squared_norm(y);
    const auto t1 = tikhonov1(m, y);
    const auto t2b = tikhonov2(m, y);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(t1.shrinkage[i] == doctest::Approx(ny / (ny + 3.0)).epsilon(1e-14));
        CHECK(t1.xhat[i] == doctest::Approx(t2b.xhat[i]).epsilon(1e-14));
    }
    // both approach LS at large ‖x̂_LS‖
    const Model f4 = scenario_fig4();
    Vector big(15, 1e6);
    CHECK(rel_err(tikhonov1(f4, big).xhat, ls_estimate(f4, big)) < 1e-9);
    CHECK(rel_err(tikhonov2(f4, big).xhat, ls_estimate(f4, big)) < 1e-9);
    CHECK(tikhonov1(f4, Vector(15)).degenerate);
    CHECK(tikhonov2(f4, Vector(15)).degenerate);
    const auto g = tikhonov2(f4, Vector(15, 0.3)).shrinkage[0];
    CHECK(g > 0.0);
    CHECK(g < 1.0);
}

TEST_CASE("ebme two-dimensional hand example") {
    const double d[] = {1.0, 0.25};  // Q = diag(1, 4)
    const Model m = build_model(Matrix::identity(2), Matrix::diagonal(d));
    const EbmeKernel kernel(m, -1.0);
    const Vector xls{1, 1};
    const auto sol = kernel.solve(transpose_times(m.Q_eig().basis, xls));
    CHECK(sol.radius2 == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(sol.k == 0);
    CHECK(sol.alpha == doctest::Approx(1.125 / 2.3125).epsilon(1e-15));

    const auto r = ebme(m, xls, -1.0);
    const double alpha = 1.125 / 2.3125;
    CHECK(r.xhat[0] == doctest::Approx(1.0 - alpha).epsilon(1e-14));
    CHECK(r.xhat[1] == doctest::Approx(1.0 - alpha * 0.5).epsilon(1e-14));
    CHECK(r.xhat[0] == doctest::Approx(0.51351).epsilon(1e-5));
    CHECK(r.xhat[1] == doctest::Approx(0.75676).epsilon(1e-5));
    // shrinkage is reported in Q_eig order: σ = 4 first
    CHECK(r.shrinkage[0] == doctest::Approx(1.0 - alpha * 0.5));
    CHECK(r.shrinkage[1] == doctest::Approx(1.0 - alpha));

    CHECK(ebme(m, Vector(2), -1.0).xhat == Vector(2));
    CHECK_FALSE(ebme(m, Vector(2), -1.0).degenerate);
}

TEST_CASE("ebme matches an independent evaluation and has the clamp structure") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> ub(-2.0, 2.0);
    std::uniform_real_distribution<double> log_scale(-3.0, 2.0);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t m = 2 + trial % 11;
        const Model model = random_model(gen, m);
        const double b = trial % 5 == 0 ? -1.0 : ub(gen);
        const Vector xls = random_vector(gen, m, std::pow(10.0, log_scale(gen)));
        const EbmeKernel kernel(model, b);
        const auto sol = kernel.solve(transpose_times(model.Q_eig().basis, xls));
        const auto oracle = ebme_oracle(model, xls, b);
        const auto r = kernel.apply(xls);

        CHECK(sol.k == oracle.k);
        CHECK(sol.alpha == doctest::Approx(oracle.alpha).epsilon(1e-10));
        CHECK(rel_err(r.xhat, oracle.xhat) < 1e-9);

        std::size_t zeros = 0;
        for (std::size_t pos = 0; pos < m; ++pos) {
            const double g = r.shrinkage[kernel.order()[pos]];
            CHECK(g >= 0.0);
            CHECK(g < 1.0);
            if (pos < sol.k) CHECK(g == 0.0);
            if (g == 0.0) ++zeros;
        }
        CHECK(zeros == sol.k);
    }
}

TEST_CASE("identity chain over 1000 random models") {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> log_scale(-2.0, 2.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t m = 2 + trial % 11;
        const Model model = random_model(gen, m);
        const Vector xls = random_vector(gen, m, std::pow(10.0, log_scale(gen)) * std::sqrt(model.eps0() / m));
        const auto s = sbme(model, xls);
        CHECK(rel_err(ebme(model, xls, 0.0).xhat, s.xhat) <= 1e-12);
        CHECK(rel_err(shrink_c(model, xls, model.eps0()).xhat, s.xhat) <= 1e-12);
        CHECK(rel_err(off_center_sbme(model, xls, Vector(m)).xhat, s.xhat) <= 1e-12);
        const auto bb = balanced_bme(model, xls);
        CHECK(rel_err(shrink_c(model, xls, 0.0).xhat, bb.xhat) <= 1e-12);
        const Vector clamped = bb.shrinkage[0] > 0 ? bb.xhat : Vector(m);
        const auto pb = positive_part_bme(model, xls);
        if (bb.shrinkage[0] > 0) {
            CHECK(rel_err(pb.xhat, clamped) <= 1e-12);
        } else {
            CHECK(pb.xhat == clamped);
        }
    }
}

TEST_CASE("scalar shrinkage commutes with rotations in the iid case") {
    std::mt19937_64 gen(5);
    const std::size_t m = 6;
    const Model model = iid(m);
    std::normal_distribution<double> n01;
    Matrix a(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = n01(gen);
    const Matrix r = sym_eig(a).basis;  // orthonormal
    for (int trial = 0; trial < 50; ++trial) {
        const Vector xls = random_vector(gen, m, 1.0 + trial * 0.1);
        const Vector rx = r * xls;
        for (const char* name : {"sbme", "bbm", "pbm", "bock", "shrinkc:c=2", "tik2", "ebme:b=-1"}) {
            const EstimatorSpec spec = parse_estimator_spec(name);
            const Estimator est(spec, model);
            CHECK(rel_err(est.apply(rx, rx).xhat, r * est.apply(xls, xls).xhat) <= 1e-12);
        }
    }
}

TEST_CASE("scalar shrinkage rules preserve direction") {
    std::mt19937_64 gen(8);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 2 + trial % 11;
        const Model model = random_model(gen, m);
        const Vector xls = random_vector(gen, m, 1.0);
        for (const char* name : {"sbme", "bbm", "pbm", "bock", "shrinkc:c=0.5", "tik2"}) {
            const auto r = Estimator(parse_estimator_spec(name), model).apply(xls, xls);
            CHECK(all_equal(r.shrinkage));
            CHECK(rel_err(r.xhat, r.shrinkage[0] * xls) <= 1e-12);
        }
    }
}

TEST_CASE("dominance predicates") {
    CHECK(sbme_dominance_holds(scenario_fig4()));
    CHECK(ebme_dominance_holds(scenario_fig4(), -1.0));
    CHECK_FALSE(sbme_dominance_holds(iid(4)));
    CHECK_FALSE(sbme_dominance_holds(iid(3)));
    for (double b : {-3.0, -1.0, 0.0, 0.5, 2.0}) CHECK(ebme_dominance_holds(iid(5), b));
    std::mt19937_64 gen(1);
    for (int t = 0; t < 100; ++t) {
        const Model model = random_model(gen, 2 + t % 11);
        CHECK(ebme_dominance_holds(model, 0.0) == sbme_dominance_holds(model));
    }
}

TEST_CASE("estimator spec text") {
    CHECK(estimator_label(parse_estimator_spec("ebme")) == "ebme:b=-1");
    CHECK(estimator_label(parse_estimator_spec("ebme:b=0.5")) == "ebme:b=0.5");
    CHECK(estimator_label(parse_estimator_spec("shrinkc:c=2.5")) == "shrinkc:c=2.5");
    for (const char* name : {"ls", "sbme", "bbm", "pbm", "bock", "tik1", "tik2", "ebme:b=-1"}) {
        CHECK(estimator_label(parse_estimator_spec(name)) == name);
    }
    CHECK_THROWS_AS(parse_estimator_spec("james-stein"), Error);
    CHECK_THROWS_AS(parse_estimator_spec("ebme:c=1"), Error);
    CHECK_THROWS_AS(parse_estimator_spec("sbme:b=1"), Error);
    try {
        parse_estimator_spec("shrinkc:c=-1");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
}

TEST_CASE("Estimator dispatch agrees with the free functions") {
    std::mt19937_64 gen(12);
    const Model model = random_model(gen, 5);
    const Vector y = random_vector(gen, model.n(), 2.0);
    const Vector xls = ls_estimate(model, y);
    CHECK(estimate(model, spec::Ls{}, y).xhat == xls);
    CHECK(estimate(model, spec::Sbme{}, y).xhat == sbme(model, xls).xhat);
    CHECK(estimate(model, spec::Ebme{-1.0}, y).xhat == ebme(model, xls, -1.0).xhat);
    CHECK(estimate(model, spec::Bock{}, y).xhat == bock(model, xls).xhat);
    CHECK(estimate(model, spec::Tikhonov1{}, y).xhat == tikhonov1(model, y).xhat);
    CHECK(estimate(model, spec::Tikhonov2{}, y).xhat == tikhonov2(model, y).xhat);
    CHECK(estimate(model, spec::PositivePartBme{}, y).xhat == positive_part_bme(model, xls).xhat);
    CHECK_THROWS_AS(Estimator(spec::OffCenterSbme{Vector(3), ""}, model), Error);
}
