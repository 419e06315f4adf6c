#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "folhodge/complex.hpp"
#include "folhodge/hodge.hpp"
#include "folhodge/witten.hpp"

using namespace folhodge;
using Catch::Approx;

namespace {
constexpr double kPi = std::numbers::pi;

LeafGrid circle(int n) { return build_leaf_grid(1, {n}, {1.0 / n}); }
LeafGrid torus(int n) { return build_leaf_grid(2, {n, n}, {1.0 / n, 1.0 / n}); }

TrigPotential cos_h() {
    return TrigPotential(1, 0, {TrigTerm{1.0, {1}, {}, {Phase::Cos}, {}}});
}

TrigPotential random_torus_potential(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_int_distribution<int> freq(0, 3);
    std::uniform_int_distribution<int> ph(0, 1);
    std::vector<TrigTerm> terms;
    for (int t = 0; t < 4; ++t) {
        TrigTerm term;
        term.coeff = coeff(rng);
        for (int i = 0; i < 2; ++i) {
            term.freq_h.push_back(freq(rng));
            term.phase_h.push_back(ph(rng) ? Phase::Sin : Phase::Cos);
        }
        terms.push_back(term);
    }
    return TrigPotential(2, 0, terms);
}

Eigen::VectorXd random_vec(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = g(rng);
    return v;
}
}  // namespace

TEST_CASE("conjugator diagonal values") {
    LeafGrid c = circle(4);
    DeformationContext ctx(c, cos_h(), Eigen::VectorXd(0), 1.0);
    const Eigen::VectorXd& t = ctx.conjugator_diagonal(0);
    // phi = cos(2 pi h) at h = 0, 1/4, 1/2, 3/4 is 1, 0, -1, 0; mean 0.
    CHECK(t[0] == Approx(std::exp(-1.0)));
    CHECK(t[1] == Approx(1.0));
    CHECK(t[2] == Approx(std::exp(1.0)));
    CHECK(t[3] == Approx(1.0));
    CHECK((t.array() > 0.0).all());
}

TEST_CASE("epsilon zero and constant phi give the identity conjugator") {
    LeafGrid c = circle(8);
    DeformationContext ctx0(c, cos_h(), Eigen::VectorXd(0), 0.0);
    CHECK((ctx0.conjugator_diagonal(1) - Eigen::VectorXd::Ones(8)).norm() == 0.0);

    TrigPotential constant(1, 0, {TrigTerm{3.0, {0}, {}, {Phase::Cos}, {}}});
    DeformationContext ctxc(c, constant, Eigen::VectorXd(0), 2.0);
    // mean-centering turns a constant potential into the identity exactly
    CHECK((ctxc.conjugator_diagonal(0) - Eigen::VectorXd::Ones(8)).norm() < 1e-14);
}

TEST_CASE("negative epsilon and overflow budget are rejected") {
    LeafGrid c = circle(8);
    CHECK_THROWS_AS(DeformationContext(c, cos_h(), Eigen::VectorXd(0), -1.0),
                    std::invalid_argument);
    CHECK_THROWS_WITH(DeformationContext(c, cos_h(), Eigen::VectorXd(0), 100.0),
                      Catch::Matchers::ContainsSubstring("overflow budget"));
}

TEST_CASE("deformed differential reduces to d at epsilon zero") {
    LeafGrid c = circle(8);
    DeformationContext ctx(c, cos_h(), Eigen::VectorXd(0), 0.0);
    LinearMap d = exterior_derivative(c, 0);
    LinearMap de = deformed_differential(ctx, 0);
    CHECK(Eigen::SparseMatrix<double>(de.mat - d.mat).norm() == 0.0);
}

TEST_CASE("two constructions of the deformed differential agree") {
    LeafGrid t = torus(6);
    TrigPotential phi = random_torus_potential(3);
    DeformationContext ctx(t, phi, Eigen::VectorXd(0), 1.5);
    for (int k = 0; k < 2; ++k) {
        LinearMap a = deformed_differential(ctx, k);
        LinearMap b = deformed_differential_pointwise(ctx, k);
        const double scale = a.mat.norm();
        CHECK(Eigen::SparseMatrix<double>(
                  a.mat - Eigen::SparseMatrix<double>(b.mat))
                  .norm() <= 1e-12 * scale);
    }
}

TEST_CASE("deformed complex property d_eps d_eps = 0") {
    LeafGrid t = torus(6);
    TrigPotential phi = random_torus_potential(5);
    DeformationContext ctx(t, phi, Eigen::VectorXd(0), 2.0);
    LinearMap d0 = deformed_differential(ctx, 0);
    LinearMap d1 = deformed_differential(ctx, 1);
    const double comp = Eigen::SparseMatrix<double>(d1.mat * d0.mat).norm();
    CHECK(comp <= 1e-12 * d0.mat.norm() * d1.mat.norm());
}

TEST_CASE("exp(-eps phi) spans the kernel of the deformed d0 on the circle") {
    LeafGrid c = circle(8);
    DeformationContext ctx(c, cos_h(), Eigen::VectorXd(0), 1.0);
    LinearMap de = deformed_differential(ctx, 0);

    Eigen::VectorXd ones = Eigen::VectorXd::Ones(8);
    CHECK(de.apply(ones).norm() > 1e-3);  // constants are no longer closed

    Eigen::VectorXd kernel_vec = ctx.conjugator_diagonal(0);
    CHECK(de.apply(kernel_vec).norm() <= 1e-12 * de.mat.norm());
}

TEST_CASE("deformed adjoint satisfies the adjointness identity") {
    std::mt19937_64 rng(17);
    LeafGrid t = torus(5);
    TrigPotential phi = random_torus_potential(7);
    DeformationContext ctx(t, phi, Eigen::VectorXd(0), 1.0);
    for (int k = 0; k < 2; ++k) {
        LinearMap de = deformed_differential(ctx, k);
        LinearMap adj = deformed_adjoint(ctx, k);
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::VectorXd a = random_vec(t.cells(k), rng);
            Eigen::VectorXd b = random_vec(t.cells(k + 1), rng);
            const double lhs = inner_product(t, k + 1, Cochain(k + 1, de.apply(a)),
                                             Cochain(k + 1, b));
            const double rhs =
                inner_product(t, k, Cochain(k, a), Cochain(k, adj.apply(b)));
            CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs) + std::abs(rhs)) *
                                             (1.0 + a.norm() * b.norm()));
        }
        // epsilon = 0 reduces to the codifferential
        DeformationContext ctx0(t, phi, Eigen::VectorXd(0), 0.0);
        CHECK(Eigen::SparseMatrix<double>(deformed_adjoint(ctx0, k).mat -
                                          codifferential(t, k).mat)
                  .norm() == 0.0);
    }
}

TEST_CASE("witten laplacian is PSD and reduces to the laplacian at eps 0") {
    std::mt19937_64 rng(23);
    LeafGrid t = torus(5);
    TrigPotential phi = random_torus_potential(11);
    DeformationContext ctx0(t, phi, Eigen::VectorXd(0), 0.0);
    DeformationContext ctx(t, phi, Eigen::VectorXd(0), 1.0);
    for (int k = 0; k <= 2; ++k) {
        CHECK(Eigen::SparseMatrix<double>(witten_laplacian(ctx0, k).mat -
                                          laplacian(t, k).mat)
                  .norm() <= 1e-13 * laplacian(t, k).mat.norm());
        LinearMap lap = witten_laplacian(ctx, k);
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXd a = random_vec(t.cells(k), rng);
            double quad = inner_product(t, k, Cochain(k, lap.apply(a)), Cochain(k, a));
            double sq = 0.0;
            if (k < 2) {
                Eigen::VectorXd da = deformed_differential(ctx, k).apply(a);
                sq += inner_product(t, k + 1, Cochain(k + 1, da), Cochain(k + 1, da));
            }
            if (k > 0) {
                Eigen::VectorXd ca = deformed_adjoint(ctx, k - 1).apply(a);
                sq += inner_product(t, k - 1, Cochain(k - 1, ca), Cochain(k - 1, ca));
            }
            CHECK(quad >= -1e-12 * a.squaredNorm());
            CHECK(quad == Approx(sq).epsilon(1e-10));
        }
    }
}

TEST_CASE("witten laplacian kernel on the circle is spanned by exp(-eps phi)") {
    LeafGrid c = circle(16);
    DeformationContext ctx(c, cos_h(), Eigen::VectorXd(0), 1.0);
    Eigen::MatrixXd basis = harmonic_basis(ctx, 0);
    REQUIRE(basis.cols() == 1);
    Eigen::VectorXd expected = ctx.conjugator_diagonal(0);
    expected /= std::sqrt(inner_product(c, 0, Cochain(0, expected), Cochain(0, expected)));
    const double overlap =
        std::abs(inner_product(c, 0, Cochain(0, expected), Cochain(0, basis.col(0))));
    CHECK(overlap >= 1.0 - 1e-8);
}

TEST_CASE("kernel transport operator") {
    LeafGrid c = circle(16);
    TrigPotential phi = cos_h();

    SECTION("epsilon zero gives the identity") {
        DeformationContext ctx(c, phi, Eigen::VectorXd(0), 0.0);
        Eigen::MatrixXd h = harmonic_basis(c, 0);
        Eigen::MatrixXd he = harmonic_basis(ctx, 0);
        KernelTransport u = kernel_transport(ctx, 0, h, h);
        REQUIRE(u.matrix.rows() == 1);
        CHECK(std::abs(u.matrix(0, 0)) == Approx(1.0));
        CHECK(u.sigma_min == Approx(1.0));
        (void)he;
    }

    SECTION("circle, phi = cos, eps = 1: nonzero 1x1 scalar") {
        DeformationContext ctx(c, phi, Eigen::VectorXd(0), 1.0);
        Eigen::MatrixXd h = harmonic_basis(c, 0);
        Eigen::MatrixXd he = harmonic_basis(ctx, 0);
        KernelTransport u = kernel_transport(ctx, 0, h, he);
        CHECK(u.sigma_min > 0.0);
    }

    SECTION("torus degree 1 with a random potential: 2x2 with positive sigma_min") {
        LeafGrid t = torus(8);
        TrigPotential rphi = random_torus_potential(13);
        DeformationContext ctx(t, rphi, Eigen::VectorXd(0), 1.0);
        Eigen::MatrixXd h = harmonic_basis(t, 1);
        Eigen::MatrixXd he = harmonic_basis(ctx, 1);
        REQUIRE(h.cols() == 2);
        REQUIRE(he.cols() == 2);
        KernelTransport u = kernel_transport(ctx, 1, h, he);
        CHECK(u.sigma_min > 0.0);
    }

    SECTION("mismatched basis dimensions are a violation signal") {
        DeformationContext ctx(c, phi, Eigen::VectorXd(0), 1.0);
        Eigen::MatrixXd h = harmonic_basis(c, 0);
        Eigen::MatrixXd bogus(c.cells(0), 2);
        bogus.setRandom();
        CHECK_THROWS_WITH(kernel_transport(ctx, 0, h, bogus),
                          Catch::Matchers::ContainsSubstring("invariance"));
    }
}

TEST_CASE("kernel transport property: T maps Ker d into Ker d_eps") {
    LeafGrid t = torus(6);
    TrigPotential phi = random_torus_potential(29);
    DeformationContext ctx(t, phi, Eigen::VectorXd(0), 1.0);
    for (int k = 0; k < 2; ++k) {
        LinearMap d = exterior_derivative(t, k);
        LinearMap de = deformed_differential(ctx, k);
        Eigen::MatrixXd dd(d.euclideanized_dense());
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(dd, Eigen::ComputeFullV);
        const Eigen::VectorXd& t_diag = ctx.conjugator_diagonal(k);
        Eigen::VectorXd inv_sqrt = d.domain_mass.cwiseSqrt().cwiseInverse();
        int checked = 0;
        Eigen::Index rank = 0;
        while (rank < svd.singularValues().size() &&
               svd.singularValues()[rank] > 1e-10 * svd.singularValues()[0])
            ++rank;
        for (Eigen::Index j = rank; j < svd.matrixV().cols(); ++j) {
            Eigen::VectorXd v = inv_sqrt.asDiagonal() * svd.matrixV().col(j);
            if ((d.apply(v)).norm() > 1e-10 * d.mat.norm() * v.norm()) continue;
            Eigen::VectorXd moved = t_diag.asDiagonal() * v;
            CHECK(de.apply(moved).norm() <= 1e-10 * de.mat.norm() * moved.norm());
            ++checked;
        }
        CHECK(checked > 0);
    }
}
