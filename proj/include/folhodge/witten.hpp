#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "complex.hpp"
#include "grid.hpp"
#include "linear_map.hpp"
#include "potential.hpp"

namespace folhodge {

// Everything needed to deform the leafwise complex by a potential: the leaf
// grid, the potential phi restricted to this leaf (v fixed), epsilon, and the
// per-degree diagonal conjugators T^k with entries exp(-eps * phi(barycenter)).
// phi is mean-centered before exponentiation; this rescales every T^k by the
// same global scalar and leaves the conjugated differential unchanged.
class DeformationContext {
public:
    DeformationContext(LeafGrid grid, TrigPotential phi, Eigen::VectorXd v_coords,
                       double epsilon, double overflow_budget = 30.0)
        : grid_(std::move(grid)), phi_(std::move(phi)), v_(std::move(v_coords)),
          epsilon_(epsilon), budget_(overflow_budget) {
        if (epsilon_ < 0.0)
            throw std::invalid_argument("DeformationContext: epsilon must be nonnegative");
        if (phi_.leaf_dim() != grid_.dim_p())
            throw std::invalid_argument("DeformationContext: potential leaf arity mismatch");
        if (v_.size() != phi_.transverse_dim())
            throw std::invalid_argument("DeformationContext: transverse coordinate mismatch");

        // Sample phi at all cell barycenters, degree by degree.
        phi_values_.resize(grid_.dim_p() + 1);
        double lo = 0.0, hi = 0.0;
        bool first = true;
        for (int k = 0; k <= grid_.dim_p(); ++k) {
            Eigen::VectorXd vals(grid_.cells(k));
            for (int c = 0; c < grid_.cells(k); ++c) {
                vals[c] = phi_.value(grid_.barycenter(k, c), v_);
                if (first || vals[c] < lo) lo = vals[c];
                if (first || vals[c] > hi) hi = vals[c];
                first = false;
            }
            phi_values_[k] = std::move(vals);
        }
        const double range = hi - lo;
        if (epsilon_ * range > budget_)
            throw std::invalid_argument(
                "DeformationContext: epsilon * range(phi) = " +
                std::to_string(epsilon_ * range) + " exceeds overflow budget " +
                std::to_string(budget_));
        const double mean = phi_values_[0].mean();
        conj_.resize(grid_.dim_p() + 1);
        for (int k = 0; k <= grid_.dim_p(); ++k)
            conj_[k] = (-epsilon_ * (phi_values_[k].array() - mean)).exp().matrix();
    }

    const LeafGrid& grid() const { return grid_; }
    const TrigPotential& potential() const { return phi_; }
    const Eigen::VectorXd& v_coords() const { return v_; }
    double epsilon() const { return epsilon_; }
    const Eigen::VectorXd& conjugator_diagonal(int k) const { return conj_.at(k); }
    const Eigen::VectorXd& phi_values(int k) const { return phi_values_.at(k); }

private:
    LeafGrid grid_;
    TrigPotential phi_;
    Eigen::VectorXd v_;
    double epsilon_;
    double budget_;
    std::vector<Eigen::VectorXd> phi_values_;
    std::vector<Eigen::VectorXd> conj_;
};

// T^k: diagonal multiplication by exp(-eps*phi) on k-cochains.
inline LinearMap conjugation_operator(const DeformationContext& ctx, int k) {
    const Eigen::VectorXd& d = ctx.conjugator_diagonal(k);
    Eigen::SparseMatrix<double> m(d.size(), d.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) trips.emplace_back(i, i, d[i]);
    m.setFromTriplets(trips.begin(), trips.end());
    Eigen::VectorXd mass = mass_vector(ctx.grid(), k);
    return LinearMap(std::move(m), mass, mass);
}

// Deformed differential via the conjugation identity T^{k+1} d^k (T^k)^{-1}.
inline LinearMap deformed_differential(const DeformationContext& ctx, int k) {
    const LeafGrid& g = ctx.grid();
    if (k < 0 || k >= g.dim_p())
        throw std::invalid_argument("deformed_differential: degree out of range");
    const LinearMap d = exterior_derivative(g, k);
    Eigen::SparseMatrix<double> m = ctx.conjugator_diagonal(k + 1).asDiagonal() * d.mat *
                                    ctx.conjugator_diagonal(k).cwiseInverse().asDiagonal();
    return LinearMap(std::move(m), d.domain_mass, d.codomain_mass);
}

// Independent construction of the same operator: apply the pointwise
// definition omega -> exp(-eps*phi) d(exp(eps*phi) omega) column by column.
// Kept separate from deformed_differential so the two routes cross-check.
inline LinearMap deformed_differential_pointwise(const DeformationContext& ctx, int k) {
    const LeafGrid& g = ctx.grid();
    if (k < 0 || k >= g.dim_p())
        throw std::invalid_argument("deformed_differential_pointwise: degree out of range");
    const LinearMap d = exterior_derivative(g, k);
    const Eigen::VectorXd grow = ctx.conjugator_diagonal(k).cwiseInverse();
    const Eigen::VectorXd shrink = ctx.conjugator_diagonal(k + 1);
    Eigen::MatrixXd dense(d.rows(), d.cols());
    Eigen::VectorXd basis = Eigen::VectorXd::Zero(d.cols());
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
        basis[j] = grow[j];
        dense.col(j) = shrink.cwiseProduct(d.apply(basis));
        basis[j] = 0.0;
    }
    return LinearMap(dense.sparseView(), d.domain_mass, d.codomain_mass);
}

// Mass-weighted adjoint of the deformed differential.
inline LinearMap deformed_adjoint(const DeformationContext& ctx, int k) {
    return deformed_differential(ctx, k).adjoint();
}

// Witten tangential Laplacian at degree k.
inline LinearMap witten_laplacian(const DeformationContext& ctx, int k) {
    const LeafGrid& g = ctx.grid();
    const int p = g.dim_p();
    if (k < 0 || k > p)
        throw std::invalid_argument("witten_laplacian: degree out of range");
    Eigen::SparseMatrix<double> acc(g.cells(k), g.cells(k));
    if (k < p) {
        const LinearMap d = deformed_differential(ctx, k);
        acc = acc + Eigen::SparseMatrix<double>(d.adjoint().mat * d.mat);
    }
    if (k > 0) {
        const LinearMap dm = deformed_differential(ctx, k - 1);
        acc = acc + Eigen::SparseMatrix<double>(dm.mat * dm.adjoint().mat);
    }
    Eigen::VectorXd mass = mass_vector(g, k);
    return LinearMap(std::move(acc), mass, mass);
}

// Matrix of Q_eps T^k Q restricted to the undeformed harmonic space,
// expressed in the supplied mass-orthonormal bases, plus its smallest
// singular value. A dimension mismatch between the bases is itself a
// violation of the kernel-dimension invariance and is reported as an error.
struct KernelTransport {
    Eigen::MatrixXd matrix;
    double sigma_min = 0.0;
};

inline KernelTransport kernel_transport(const DeformationContext& ctx, int k,
                                        const Eigen::MatrixXd& harmonic_basis,
                                        const Eigen::MatrixXd& deformed_harmonic_basis) {
    if (harmonic_basis.cols() != deformed_harmonic_basis.cols())
        throw std::runtime_error(
            "kernel_transport: harmonic dimensions differ between complexes (" +
            std::to_string(harmonic_basis.cols()) + " vs " +
            std::to_string(deformed_harmonic_basis.cols()) +
            "); kernel-dimension invariance is violated on this instance");
    const Eigen::VectorXd mass = mass_vector(ctx.grid(), k);
    const Eigen::VectorXd& t = ctx.conjugator_diagonal(k);
    // U_{ij} = <h_eps_i, T h_j>_mass
    Eigen::MatrixXd u = deformed_harmonic_basis.transpose() * mass.asDiagonal() *
                        t.asDiagonal() * harmonic_basis;
    KernelTransport out;
    out.matrix = u;
    if (u.size() == 0) {
        out.sigma_min = 0.0;
    } else {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(u);
        out.sigma_min = svd.singularValues().minCoeff();
    }
    return out;
}

}  // namespace folhodge
