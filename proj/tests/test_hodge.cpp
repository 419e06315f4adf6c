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

TEST_CASE("harmonic bases on named instances") {
    LeafGrid c = circle(16);
    Eigen::MatrixXd h0 = harmonic_basis(c, 0);
    REQUIRE(h0.cols() == 1);
    // normalized constants
    Eigen::VectorXd dev = h0.col(0) - Eigen::VectorXd::Constant(16, h0(0, 0));
    CHECK(dev.norm() < 1e-10 * h0.col(0).norm());

    DeformationContext ctx(c, cos_h(), Eigen::VectorXd(0), 1.0);
    Eigen::MatrixXd he = harmonic_basis(ctx, 0);
    REQUIRE(he.cols() == 1);
    Eigen::VectorXd expected = ctx.conjugator_diagonal(0);
    expected /= std::sqrt(inner_product(c, 0, Cochain(0, expected), Cochain(0, expected)));
    CHECK(std::abs(inner_product(c, 0, Cochain(0, expected), Cochain(0, he.col(0)))) >=
          1.0 - 1e-8);

    // torus degree 1: span of the constant x- and y-edge fields
    LeafGrid t = torus(4);
    Eigen::MatrixXd h1 = harmonic_basis(t, 1);
    REQUIRE(h1.cols() == 2);
    Eigen::VectorXd xfield = Eigen::VectorXd::Zero(32), yfield = Eigen::VectorXd::Zero(32);
    xfield.head(16).setConstant(1.0);
    yfield.tail(16).setConstant(1.0);
    const Eigen::VectorXd mass = mass_vector(t, 1);
    auto proj_norm = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd coef = h1.transpose() * mass.asDiagonal() * v;
        return (h1 * coef - v).norm() / v.norm();
    };
    CHECK(proj_norm(xfield) < 1e-8);
    CHECK(proj_norm(yfield) < 1e-8);
}

TEST_CASE("hodge decomposition splits correctly") {
    std::mt19937_64 rng(31);
    LeafGrid c = circle(16);

    SECTION("constants are purely harmonic") {
        HodgeSplit s = hodge_decompose(c, 0, Cochain(0, Eigen::VectorXd::Ones(16)));
        CHECK((s.harmonic.values - Eigen::VectorXd::Ones(16)).norm() < 1e-10);
        CHECK(s.exact.values.norm() < 1e-10);
        CHECK(s.coexact.values.norm() < 1e-10);
        CHECK(s.residual < 1e-10);
    }

    SECTION("an exact input is recovered in the exact part") {
        Eigen::VectorXd a = random_vec(16, rng);
        Eigen::VectorXd omega = exterior_derivative(c, 0).apply(a);
        HodgeSplit s = hodge_decompose(c, 1, Cochain(1, omega));
        CHECK((s.exact.values - omega).norm() <= 1e-10 * omega.norm());
    }

    SECTION("random torus 1-cochains: orthogonal parts, tiny residual") {
        LeafGrid t = torus(5);
        const Eigen::VectorXd mass = mass_vector(t, 1);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::VectorXd omega = random_vec(t.cells(1), rng);
            HodgeSplit s = hodge_decompose(t, 1, Cochain(1, omega));
            const double n2 = omega.squaredNorm() * mass[0];
            CHECK(s.residual <= 1e-10);
            auto ip = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
                return std::abs((a.array() * mass.array() * b.array()).sum());
            };
            CHECK(ip(s.harmonic.values, s.exact.values) <= 1e-10 * n2);
            CHECK(ip(s.harmonic.values, s.coexact.values) <= 1e-10 * n2);
            CHECK(ip(s.exact.values, s.coexact.values) <= 1e-10 * n2);
        }
    }

    SECTION("deformed decomposition behaves the same") {
        LeafGrid t = torus(5);
        DeformationContext ctx(t, random_torus_potential(41), Eigen::VectorXd(0), 1.0);
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXd omega = random_vec(t.cells(1), rng);
            HodgeSplit s = hodge_decompose(ctx, 1, Cochain(1, omega));
            CHECK(s.residual <= 1e-10);
        }
    }
}

TEST_CASE("betti numbers") {
    LeafGrid c = circle(16);
    CHECK(betti_numbers(c) == std::vector<int>{1, 1});

    LeafGrid t = torus(6);
    CHECK(betti_numbers(t) == std::vector<int>{1, 2, 1});

    TrigPotential phi = random_torus_potential(51);
    CHECK(betti_numbers(t, 1.0, &phi, Eigen::VectorXd(0)) == std::vector<int>{1, 2, 1});
}

TEST_CASE("euler characteristic via rank-nullity") {
    LeafGrid t = torus(5);
    auto betti = betti_numbers(t);
    int chi = 0, chi_rank = 0;
    for (int k = 0; k <= 2; ++k) {
        chi += (k % 2 ? -1 : 1) * betti[k];
        int rank_k = 0, rank_km1 = 0;
        if (k < 2) rank_k = detail::image_kernel_bases(exterior_derivative(t, k)).rank;
        if (k > 0) rank_km1 = detail::image_kernel_bases(exterior_derivative(t, k - 1)).rank;
        chi_rank += (k % 2 ? -1 : 1) * (t.cells(k) - rank_k - rank_km1);
    }
    CHECK(chi == chi_rank);
    CHECK(chi == 0);
}

TEST_CASE("transport identities") {
    LeafGrid c = circle(16);

    SECTION("epsilon zero: both angles vanish") {
        DeformationContext ctx(c, cos_h(), Eigen::VectorXd(0), 0.0);
        TransportResiduals r = verify_transport_identities(ctx, 0);
        CHECK(r.kernel_angle <= 1e-10);
        CHECK(r.image_angle == 0.0);
    }

    SECTION("circle, phi = cos, eps = 1") {
        DeformationContext ctx(c, cos_h(), Eigen::VectorXd(0), 1.0);
        TransportResiduals r = verify_transport_identities(ctx, 0);
        CHECK(r.kernel_angle <= 1e-8);
    }

    SECTION("torus, random phi, eps = 1, degree 1") {
        LeafGrid t = torus(6);
        DeformationContext ctx(t, random_torus_potential(61), Eigen::VectorXd(0), 1.0);
        TransportResiduals r = verify_transport_identities(ctx, 1);
        CHECK(r.kernel_angle <= 1e-8);
        CHECK(r.image_angle <= 1e-8);
    }
}

TEST_CASE("block structure of T in the two Hodge decompositions") {
    LeafGrid c = circle(16);

    SECTION("epsilon zero: U and B are identities, zero block vanishes") {
        LeafGrid t = torus(5);
        DeformationContext ctx(t, random_torus_potential(71), Eigen::VectorXd(0), 0.0);
        BlockReport rep = verify_block_structure(ctx, 1);
        CHECK(rep.zero_block_norm <= 1e-10);
        CHECK(rep.u_min_singular == Approx(1.0));
        CHECK(rep.b_min_singular == Approx(1.0));
    }

    SECTION("degree 0 has no exact part; report degenerates to U") {
        DeformationContext ctx(c, cos_h(), Eigen::VectorXd(0), 1.0);
        BlockReport rep = verify_block_structure(ctx, 0);
        CHECK(rep.exact_dim == 0);
        CHECK(rep.u_min_singular > 0.0);
        CHECK(rep.zero_block_norm == 0.0);
    }

    SECTION("torus, random phi, eps = 1, degree 1: full structure") {
        LeafGrid t = torus(5);
        DeformationContext ctx(t, random_torus_potential(81), Eigen::VectorXd(0), 1.0);
        BlockReport rep = verify_block_structure(ctx, 1);
        CHECK(rep.harmonic_dim == 2);
        CHECK(rep.exact_dim > 0);
        CHECK(rep.zero_block_norm <= 1e-10 * rep.t_norm);
        CHECK(rep.u_min_singular > 0.0);
        CHECK(rep.b_min_singular > 0.0);
    }
}
