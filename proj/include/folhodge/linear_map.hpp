#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <stdexcept>

namespace folhodge {

// Sparse operator between cochain spaces, carrying the diagonal mass weights
// of its domain and codomain so the adjoint is well defined without extra
// context.
struct LinearMap {
    Eigen::SparseMatrix<double> mat;
    Eigen::VectorXd domain_mass;    // one positive weight per domain cell
    Eigen::VectorXd codomain_mass;  // one positive weight per codomain cell

    LinearMap() = default;
    LinearMap(Eigen::SparseMatrix<double> m, Eigen::VectorXd dm, Eigen::VectorXd cm)
        : mat(std::move(m)), domain_mass(std::move(dm)), codomain_mass(std::move(cm)) {
        if (mat.cols() != domain_mass.size() || mat.rows() != codomain_mass.size())
            throw std::invalid_argument("LinearMap: mass vector sizes do not match matrix");
        if ((domain_mass.array() <= 0.0).any() || (codomain_mass.array() <= 0.0).any())
            throw std::invalid_argument("LinearMap: mass weights must be strictly positive");
    }

    Eigen::Index rows() const { return mat.rows(); }
    Eigen::Index cols() const { return mat.cols(); }

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return mat * x; }

    // Mass-weighted adjoint: <A a, b>_codomain = <a, adjoint(A) b>_domain.
    LinearMap adjoint() const {
        Eigen::SparseMatrix<double> at = mat.transpose();
        Eigen::SparseMatrix<double> scaled =
            domain_mass.cwiseInverse().asDiagonal() * at * codomain_mass.asDiagonal();
        return LinearMap(std::move(scaled), codomain_mass, domain_mass);
    }

    // Similarity transform M^{1/2} A M^{-1/2} that turns a mass-self-adjoint
    // endomorphism into an ordinary symmetric matrix. Requires square shape
    // with matching masses.
    Eigen::SparseMatrix<double> symmetrized() const {
        if (rows() != cols())
            throw std::invalid_argument("LinearMap::symmetrized: operator not square");
        Eigen::VectorXd s = codomain_mass.cwiseSqrt();
        Eigen::SparseMatrix<double> out =
            s.asDiagonal() * mat * s.cwiseInverse().asDiagonal();
        return out;
    }

    // Same similarity for rectangular maps (used for rank/image computations):
    // Mc^{1/2} A Md^{-1/2}, which maps Euclidean coordinates to Euclidean
    // coordinates with the mass inner products absorbed.
    Eigen::MatrixXd euclideanized_dense() const {
        Eigen::MatrixXd d = Eigen::MatrixXd(mat);
        Eigen::VectorXd sc = codomain_mass.cwiseSqrt();
        Eigen::VectorXd sd = domain_mass.cwiseSqrt();
        return sc.asDiagonal() * d * sd.cwiseInverse().asDiagonal();
    }

    double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b, bool domain_side) const {
        const Eigen::VectorXd& m = domain_side ? domain_mass : codomain_mass;
        return (a.array() * m.array() * b.array()).sum();
    }
};

// Compose two maps; checks the mass chain lines up.
inline LinearMap compose(const LinearMap& outer, const LinearMap& inner) {
    if (outer.cols() != inner.rows())
        throw std::invalid_argument("compose: dimension mismatch");
    Eigen::SparseMatrix<double> m = outer.mat * inner.mat;
    return LinearMap(std::move(m), inner.domain_mass, outer.codomain_mass);
}

inline double operator_norm_estimate(const LinearMap& a) {
    // Infinity-norm of the matrix; cheap and adequate for relative thresholds.
    double best = 0.0;
    Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(a.rows());
    for (int k = 0; k < a.mat.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a.mat, k); it; ++it)
            rowsum[it.row()] += std::abs(it.value());
    for (Eigen::Index i = 0; i < rowsum.size(); ++i) best = std::max(best, rowsum[i]);
    return best;
}

}  // namespace folhodge
