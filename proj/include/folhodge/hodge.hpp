#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "complex.hpp"
#include "grid.hpp"
#include "linear_map.hpp"
#include "spectral.hpp"
#include "witten.hpp"

namespace folhodge {

// Thrown when the kernel cut is too poorly separated to trust; carries the
// report so the caller can refine the grid or change epsilon.
class AmbiguousKernelError : public std::runtime_error {
public:
    explicit AmbiguousKernelError(SpectrumReport rep)
        : std::runtime_error("ambiguous kernel cut: gap ratio " +
                             std::to_string(rep.gap_ratio) + " below requirement"),
          report(std::move(rep)) {}
    SpectrumReport report;
};

// Mass-orthonormal basis of the numerical kernel of a mass-self-adjoint PSD
// operator. Basis size is the kernel_dimension decision.
inline Eigen::MatrixXd harmonic_basis_of(const LinearMap& lap,
                                         const KernelPolicy& policy = {}) {
    SpectrumReport rep = kernel_dimension(lap, policy);
    if (rep.ambiguous) throw AmbiguousKernelError(std::move(rep));
    if (rep.kernel_dim == 0) return Eigen::MatrixXd(lap.rows(), 0);
    detail::EigenPairs pairs = detail::lowest_pairs(
        lap, std::max(rep.kernel_dim, std::min<int>(static_cast<int>(lap.rows()),
                                                    policy.probe_count)),
        policy);
    Eigen::VectorXd inv_sqrt = lap.domain_mass.cwiseSqrt().cwiseInverse();
    // Symmetrized-coordinate eigenvectors are Euclidean-orthonormal; mapping
    // back through M^{-1/2} makes them mass-orthonormal.
    return inv_sqrt.asDiagonal() * pairs.vectors.leftCols(rep.kernel_dim);
}

inline Eigen::MatrixXd harmonic_basis(const LeafGrid& grid, int k,
                                      const KernelPolicy& policy = {}) {
    return harmonic_basis_of(laplacian(grid, k), policy);
}

inline Eigen::MatrixXd harmonic_basis(const DeformationContext& ctx, int k,
                                      const KernelPolicy& policy = {}) {
    return harmonic_basis_of(witten_laplacian(ctx, k), policy);
}

namespace detail {

// Rank-revealing image/kernel bases of a rectangular map, mass-orthonormal,
// with the same relative threshold policy as the kernel decision.
struct SubspaceBases {
    Eigen::MatrixXd image;   // columns span Im(A) in codomain coordinates
    Eigen::MatrixXd kernel;  // columns span Ker(A) in domain coordinates
    int rank = 0;
};

inline SubspaceBases image_kernel_bases(const LinearMap& a, double rel_tol = 1e-10) {
    Eigen::MatrixXd e = a.euclideanized_dense();
    // BDC over Jacobi: the euclideanized maps reach a few thousand rows
    Eigen::BDCSVD<Eigen::MatrixXd> svd(e, Eigen::ComputeThinU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cut = sv.size() ? rel_tol * sv[0] : 0.0;
    int rank = 0;
    while (rank < sv.size() && sv[rank] > cut) ++rank;
    SubspaceBases out;
    out.rank = rank;
    Eigen::VectorXd inv_sqrt_c = a.codomain_mass.cwiseSqrt().cwiseInverse();
    Eigen::VectorXd inv_sqrt_d = a.domain_mass.cwiseSqrt().cwiseInverse();
    out.image = inv_sqrt_c.asDiagonal() * svd.matrixU().leftCols(rank);
    out.kernel = inv_sqrt_d.asDiagonal() * svd.matrixV().rightCols(svd.matrixV().cols() - rank);
    return out;
}

// Principal angles between equal- or unequal-dimensional subspaces given by
// mass-orthonormal bases, in the mass inner product.
inline std::vector<double> principal_angles(const Eigen::MatrixXd& a,
                                            const Eigen::MatrixXd& b,
                                            const Eigen::VectorXd& mass) {
    if (a.cols() == 0 || b.cols() == 0) return {};
    Eigen::MatrixXd overlap = a.transpose() * mass.asDiagonal() * b;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(overlap);
    std::vector<double> angles;
    const Eigen::Index m = std::min(a.cols(), b.cols());
    for (Eigen::Index i = 0; i < m; ++i) {
        double c = std::clamp(svd.singularValues()[i], -1.0, 1.0);
        angles.push_back(std::acos(c));
    }
    return angles;
}

// Mass-orthonormalize the columns of a basis (modified Gram-Schmidt).
inline Eigen::MatrixXd mass_orthonormalize(Eigen::MatrixXd b, const Eigen::VectorXd& mass) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index i = 0; i < j; ++i) {
                const double proj = (b.col(i).array() * mass.array() * b.col(j).array()).sum();
                b.col(j) -= proj * b.col(i);
            }
        const double nrm =
            std::sqrt((b.col(j).array() * mass.array() * b.col(j).array()).sum());
        if (nrm < 1e-300) throw std::runtime_error("mass_orthonormalize: rank-deficient basis");
        b.col(j) /= nrm;
    }
    return b;
}

}  // namespace detail

// Orthogonal splitting of a k-cochain into harmonic + exact + coexact parts.
// The coexact part is computed by its own projection (not as a remainder), so
// the reconstruction residual is a genuine completeness check.
struct HodgeSplit {
    Cochain harmonic, exact, coexact;
    double residual = 0.0;
};

namespace detail {

// Precomputed projection bases for one (instance, degree): lets a batch of
// cochains be decomposed without refactoring d each time.
struct DecompositionBases {
    Eigen::VectorXd mass;
    Eigen::MatrixXd harmonic;  // mass-orthonormal columns
    Eigen::MatrixXd exact;     // Im d^{k-1}
    Eigen::MatrixXd coexact;   // Im (d^k)*
};

inline HodgeSplit decompose_with_bases(const Eigen::VectorXd& omega, int k,
                                       const DecompositionBases& bases) {
    HodgeSplit out;
    const Eigen::VectorXd& mass = bases.mass;
    const auto project = [&](const Eigen::MatrixXd& basis) {
        if (basis.cols() == 0) return Eigen::VectorXd(Eigen::VectorXd::Zero(omega.size()));
        return Eigen::VectorXd(basis * (basis.transpose() * mass.asDiagonal() * omega));
    };
    out.harmonic = Cochain(k, project(bases.harmonic));
    out.exact = Cochain(k, project(bases.exact));
    out.coexact = Cochain(k, project(bases.coexact));
    const double wn = std::sqrt((omega.array() * mass.array() * omega.array()).sum());
    Eigen::VectorXd diff =
        omega - out.harmonic.values - out.exact.values - out.coexact.values;
    const double dn = std::sqrt((diff.array() * mass.array() * diff.array()).sum());
    out.residual = wn > 0.0 ? dn / wn : dn;
    return out;
}

inline DecompositionBases decomposition_bases(const Eigen::VectorXd& mass,
                                              const Eigen::MatrixXd& harm,
                                              const LinearMap* d_below,  // null at k=0
                                              const LinearMap* d_here,   // null at k=p
                                              Eigen::Index n) {
    DecompositionBases bases;
    bases.mass = mass;
    bases.harmonic = harm;
    bases.exact = d_below ? image_kernel_bases(*d_below).image
                          : Eigen::MatrixXd(n, 0);
    bases.coexact = d_here ? image_kernel_bases(d_here->adjoint()).image
                           : Eigen::MatrixXd(n, 0);
    return bases;
}

inline HodgeSplit decompose_impl(const Eigen::VectorXd& omega, int k, int p,
                                 const Eigen::VectorXd& mass,
                                 const Eigen::MatrixXd& harm,
                                 const LinearMap* d_below,  // d^{k-1}, null at k=0
                                 const LinearMap* d_here) { // d^k, null at k=p
    (void)p;
    return decompose_with_bases(
        omega, k, decomposition_bases(mass, harm, d_below, d_here, omega.size()));
}

}  // namespace detail

inline HodgeSplit hodge_decompose(const LeafGrid& grid, int k, const Cochain& omega,
                                  const KernelPolicy& policy = {}) {
    if (omega.degree != k || omega.values.size() != grid.cells(k))
        throw std::invalid_argument("hodge_decompose: cochain does not match degree/grid");
    const int p = grid.dim_p();
    Eigen::MatrixXd harm = harmonic_basis(grid, k, policy);
    LinearMap d_below, d_here;
    if (k > 0) d_below = exterior_derivative(grid, k - 1);
    if (k < p) d_here = exterior_derivative(grid, k);
    return detail::decompose_impl(omega.values, k, p, mass_vector(grid, k), harm,
                                  k > 0 ? &d_below : nullptr, k < p ? &d_here : nullptr);
}

inline HodgeSplit hodge_decompose(const DeformationContext& ctx, int k, const Cochain& omega,
                                  const KernelPolicy& policy = {}) {
    const LeafGrid& grid = ctx.grid();
    if (omega.degree != k || omega.values.size() != grid.cells(k))
        throw std::invalid_argument("hodge_decompose: cochain does not match degree/grid");
    const int p = grid.dim_p();
    Eigen::MatrixXd harm = harmonic_basis(ctx, k, policy);
    LinearMap d_below, d_here;
    if (k > 0) d_below = deformed_differential(ctx, k - 1);
    if (k < p) d_here = deformed_differential(ctx, k);
    return detail::decompose_impl(omega.values, k, p, mass_vector(grid, k), harm,
                                  k > 0 ? &d_below : nullptr, k < p ? &d_here : nullptr);
}

// Betti numbers beta_0..beta_p of the (possibly deformed) leafwise complex.
inline std::vector<int> betti_numbers(const LeafGrid& grid, double epsilon = 0.0,
                                      const TrigPotential* phi = nullptr,
                                      const Eigen::VectorXd& v_coords = {},
                                      const KernelPolicy& policy = {}) {
    std::vector<int> betti;
    const bool deformed = phi != nullptr && epsilon != 0.0;
    std::optional<DeformationContext> ctx;
    if (deformed) ctx.emplace(grid, *phi, v_coords, epsilon);
    for (int k = 0; k <= grid.dim_p(); ++k) {
        const LinearMap lap = deformed ? witten_laplacian(*ctx, k) : laplacian(grid, k);
        SpectrumReport rep = kernel_dimension(lap, policy);
        if (rep.ambiguous) throw AmbiguousKernelError(std::move(rep));
        betti.push_back(rep.kernel_dim);
    }
    return betti;
}

// Principal-angle residuals for the kernel/image transport identities:
// T^k(Ker d^k) vs Ker d_eps^k and T^k(Im d^{k-1}) vs Im d_eps^{k-1}.
struct TransportResiduals {
    double kernel_angle = 0.0;
    double image_angle = 0.0;
};

inline TransportResiduals verify_transport_identities(const DeformationContext& ctx, int k) {
    const LeafGrid& grid = ctx.grid();
    if (k < 0 || k >= grid.dim_p())
        throw std::invalid_argument("verify_transport_identities: degree out of range");
    const Eigen::VectorXd mass = mass_vector(grid, k);
    const Eigen::VectorXd& t = ctx.conjugator_diagonal(k);
    TransportResiduals out;

    // sin-based principal angle: accurate near zero, where the cosine route
    // saturates at acos(1 - ulp) ~ 1e-8.
    auto max_angle = [&](const Eigen::MatrixXd& raw, const Eigen::MatrixXd& target) {
        if (raw.cols() != target.cols())
            throw std::runtime_error("verify_transport_identities: subspace dimension mismatch");
        if (raw.cols() == 0) return 0.0;
        Eigen::MatrixXd moved = detail::mass_orthonormalize(t.asDiagonal() * raw, mass);
        Eigen::MatrixXd resid =
            moved - target * (target.transpose() * mass.asDiagonal() * moved);
        Eigen::VectorXd sqrt_mass = mass.cwiseSqrt();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(sqrt_mass.asDiagonal() * resid);
        const double s = std::clamp(svd.singularValues()[0], 0.0, 1.0);
        return std::asin(s);
    };

    auto ker = detail::image_kernel_bases(exterior_derivative(grid, k));
    auto ker_eps = detail::image_kernel_bases(deformed_differential(ctx, k));
    out.kernel_angle = max_angle(ker.kernel, ker_eps.kernel);

    if (k > 0) {
        auto im = detail::image_kernel_bases(exterior_derivative(grid, k - 1));
        auto im_eps = detail::image_kernel_bases(deformed_differential(ctx, k - 1));
        out.image_angle = max_angle(im.image, im_eps.image);
    }
    return out;
}

// The 2x2 block structure of T^k in the Hodge decompositions of both
// complexes: U^k on the harmonic corner, B^k on the exact corner, and the
// upper-right block that the conjugation identity forces to vanish.
struct BlockReport {
    double zero_block_norm = 0.0;
    double u_min_singular = 0.0;
    double b_min_singular = 0.0;
    int harmonic_dim = 0, exact_dim = 0;
    int harmonic_dim_deformed = 0, exact_dim_deformed = 0;
    double t_norm = 0.0;
};

inline BlockReport verify_block_structure(const DeformationContext& ctx, int k,
                                          const KernelPolicy& policy = {}) {
    const LeafGrid& grid = ctx.grid();
    const int p = grid.dim_p();
    if (k < 0 || k > p)
        throw std::invalid_argument("verify_block_structure: degree out of range");
    const Eigen::VectorXd mass = mass_vector(grid, k);
    const Eigen::VectorXd& t = ctx.conjugator_diagonal(k);

    Eigen::MatrixXd harm = harmonic_basis(grid, k, policy);
    Eigen::MatrixXd harm_eps = harmonic_basis(ctx, k, policy);
    Eigen::MatrixXd exact(grid.cells(k), 0), exact_eps(grid.cells(k), 0);
    if (k > 0) {
        exact = detail::image_kernel_bases(exterior_derivative(grid, k - 1)).image;
        exact_eps = detail::image_kernel_bases(deformed_differential(ctx, k - 1)).image;
    }

    BlockReport rep;
    rep.harmonic_dim = static_cast<int>(harm.cols());
    rep.harmonic_dim_deformed = static_cast<int>(harm_eps.cols());
    rep.exact_dim = static_cast<int>(exact.cols());
    rep.exact_dim_deformed = static_cast<int>(exact_eps.cols());
    rep.t_norm = t.maxCoeff();
    if (rep.harmonic_dim != rep.harmonic_dim_deformed || rep.exact_dim != rep.exact_dim_deformed)
        throw std::runtime_error(
            "verify_block_structure: Hodge summand dimensions differ between complexes; "
            "kernel-dimension invariance is violated on this instance");

    auto block = [&](const Eigen::MatrixXd& rows, const Eigen::MatrixXd& cols) {
        return Eigen::MatrixXd(rows.transpose() * mass.asDiagonal() * t.asDiagonal() * cols);
    };
    auto sigma_min = [](const Eigen::MatrixXd& m) {
        if (m.size() == 0) return 0.0;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
        return svd.singularValues().minCoeff();
    };

    if (harm.cols() > 0) rep.u_min_singular = sigma_min(block(harm_eps, harm));
    if (exact.cols() > 0) {
        rep.b_min_singular = sigma_min(block(exact_eps, exact));
        if (harm.cols() > 0) rep.zero_block_norm = block(harm_eps, exact).norm();
    }
    return rep;
}

}  // namespace folhodge
