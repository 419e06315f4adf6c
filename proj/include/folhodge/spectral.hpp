#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "linear_map.hpp"
#include "potential.hpp"
#include "witten.hpp"

namespace folhodge {

// Numerical reading of "dim Ker": eigenvalues below an adaptive threshold,
// with the cut quality surfaced instead of silently trusted.
struct SpectrumReport {
    std::vector<double> eigenvalues;  // ascending, the computed low end
    int kernel_dim = 0;
    double threshold = 0.0;
    double gap_ratio = std::numeric_limits<double>::infinity();
    bool ambiguous = false;
    double operator_norm = 0.0;
};

struct KernelPolicy {
    double abs_floor_rel = 1e-10;  // absolute floor, relative to ||op||
    double window_rel = 1e-8;      // candidate window for gap search
    double gap_requirement = 1e3;  // gap ratio below this marks ambiguity
    int probe_count = 16;          // eigenvalues computed initially
    std::uint64_t seed = 12345;    // iterative-solver starting vectors
    int dense_cutoff = 2000;       // dense solve at or below this dimension
};

namespace detail {

struct EigenPairs {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // Euclidean-orthonormal columns (symmetrized coords)
};

inline void check_symmetry(const Eigen::SparseMatrix<double>& s, double norm) {
    const double asym =
        Eigen::SparseMatrix<double>(Eigen::SparseMatrix<double>(s.transpose()) - s).norm();
    if (asym > 1e-10 * std::max(norm, 1.0))
        throw std::invalid_argument("spectral: operator asymmetry " + std::to_string(asym) +
                                    " exceeds tolerance");
}

inline EigenPairs dense_lowest(const Eigen::SparseMatrix<double>& s, int m) {
    Eigen::MatrixXd d(s);
    d = 0.5 * (d + d.transpose().eval());  // kill roundoff asymmetry
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectral: dense eigensolver failed to converge");
    EigenPairs out;
    out.values = es.eigenvalues().head(m);
    out.vectors = es.eigenvectors().leftCols(m);
    return out;
}

// Block shift-invert subspace iteration for the m smallest eigenvalues of a
// large sparse symmetric PSD matrix. The block resolves degenerate clusters
// that a single Krylov vector would miss.
inline EigenPairs shift_invert_lowest(const Eigen::SparseMatrix<double>& s, int m,
                                      double norm, std::uint64_t seed) {
    const Eigen::Index n = s.rows();
    const double sigma = std::max(norm, 1.0) * 1e-8;  // keeps the factor definite
    Eigen::SparseMatrix<double> shifted = s;
    for (Eigen::Index i = 0; i < n; ++i) shifted.coeffRef(i, i) += sigma;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("spectral: shift-invert factorization failed");

    const int block = std::min<Eigen::Index>(n, m + 8);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd x(n, block);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < block; ++j) x(i, j) = gauss(rng);

    const double tol = 1e-10 * std::max(norm, 1.0);
    Eigen::VectorXd ritz(block);
    double worst_residual = std::numeric_limits<double>::infinity();
    const int max_iter = 400;
    for (int it = 0; it < max_iter; ++it) {
        x = solver.solve(x);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
        x = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);
        // Rayleigh-Ritz on the block.
        Eigen::MatrixXd h = x.transpose() * (s * x).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (h + h.transpose()));
        x = x * es.eigenvectors();
        ritz = es.eigenvalues();
        worst_residual = 0.0;
        for (int j = 0; j < m; ++j)
            worst_residual =
                std::max(worst_residual, (s * x.col(j) - ritz[j] * x.col(j)).norm());
        if (worst_residual <= tol) break;
    }
    if (worst_residual > 10.0 * tol)
        throw std::runtime_error(
            "spectral: shift-invert iteration did not converge, worst residual " +
            std::to_string(worst_residual));
    EigenPairs out;
    out.values = ritz.head(m);
    out.vectors = x.leftCols(m);
    return out;
}

inline EigenPairs lowest_pairs(const LinearMap& op, int m, const KernelPolicy& policy) {
    if (op.rows() != op.cols())
        throw std::invalid_argument("spectral: operator must be square");
    if (m < 1 || m > op.rows())
        throw std::invalid_argument("spectral: eigenvalue count out of range");
    Eigen::SparseMatrix<double> s = op.symmetrized();
    const double norm = operator_norm_estimate(op);
    check_symmetry(s, norm);
    if (op.rows() <= policy.dense_cutoff) return dense_lowest(s, m);
    return shift_invert_lowest(s, m, norm, policy.seed);
}

}  // namespace detail

// The m smallest eigenvalues of a mass-self-adjoint PSD operator, ascending.
inline std::vector<double> lowest_eigenvalues(const LinearMap& op, int m,
                                              const KernelPolicy& policy = {}) {
    detail::EigenPairs pairs = detail::lowest_pairs(op, m, policy);
    return std::vector<double>(pairs.values.data(), pairs.values.data() + pairs.values.size());
}

// Kernel-dimension decision: count below max(absolute floor, gap-based cut),
// with the cut quality reported. Invariant under positive scaling of op.
inline SpectrumReport kernel_dimension(const LinearMap& op, const KernelPolicy& policy = {}) {
    const double norm = operator_norm_estimate(op);
    SpectrumReport rep;
    rep.operator_norm = norm;
    const int n = static_cast<int>(op.rows());
    if (norm == 0.0) {  // zero map
        rep.eigenvalues.assign(std::min(n, policy.probe_count), 0.0);
        rep.kernel_dim = n;
        rep.threshold = 0.0;
        return rep;
    }

    int m = std::min(n, policy.probe_count);
    detail::EigenPairs pairs;
    const double floor = policy.abs_floor_rel * norm;
    while (true) {
        pairs = detail::lowest_pairs(op, m, policy);
        if (m == n || pairs.values[m - 1] > floor) break;
        m = std::min(n, 2 * m);  // whole probe window inside the floor: widen
    }
    rep.eigenvalues.assign(pairs.values.data(), pairs.values.data() + m);

    double threshold = floor;
    // Gap refinement: the largest relative gap whose lower edge sits inside
    // the candidate window may push the cut above the absolute floor.
    const double window = policy.window_rel * norm;
    double best_ratio = 0.0;
    int best_i = -1;
    for (int i = 0; i + 1 < m; ++i) {
        const double lo = rep.eigenvalues[i];
        if (lo <= floor || lo > window) continue;
        const double ratio = rep.eigenvalues[i + 1] / lo;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            best_i = i;
        }
    }
    if (best_i >= 0 && best_ratio > policy.gap_requirement)
        threshold = std::sqrt(rep.eigenvalues[best_i] * rep.eigenvalues[best_i + 1]);

    int dim = 0;
    while (dim < m && rep.eigenvalues[dim] <= threshold) ++dim;
    rep.kernel_dim = dim;
    rep.threshold = threshold;
    if (dim == 0 || dim == n) {
        rep.gap_ratio = std::numeric_limits<double>::infinity();
    } else {
        const double below = std::max(rep.eigenvalues[dim - 1], 1e-300);
        rep.gap_ratio = rep.eigenvalues[dim] / below;
    }
    rep.ambiguous = rep.gap_ratio < policy.gap_requirement;
    return rep;
}

// Eigenvalues below the largest relative gap among the low end of the
// spectrum: the semiclassical "cluster" count, with the gap ratio achieved.
struct ClusterReport {
    int cluster_count = 0;
    double gap_ratio = std::numeric_limits<double>::infinity();
};

inline ClusterReport low_cluster(const std::vector<double>& eigenvalues, double norm) {
    ClusterReport out;
    const int m = static_cast<int>(eigenvalues.size());
    if (m < 2) {
        out.cluster_count = m;
        return out;
    }
    const double tiny = 1e-14 * std::max(norm, 1.0);
    double best = 0.0;
    int best_i = 0;
    for (int i = 0; i + 1 < m; ++i) {
        const double ratio =
            (eigenvalues[i + 1] + tiny) / (std::max(eigenvalues[i], 0.0) + tiny);
        if (ratio > best) {
            best = ratio;
            best_i = i;
        }
    }
    out.cluster_count = best_i + 1;
    out.gap_ratio = best;
    return out;
}

// One sweep row per epsilon; failures are recorded, not fatal to the sweep.
struct SweepRow {
    double epsilon = 0.0;
    std::optional<SpectrumReport> report;
    ClusterReport cluster;
    std::string error;  // empty on success
};

inline std::vector<SweepRow> spectral_flow(const LeafGrid& grid, const TrigPotential& phi,
                                           const Eigen::VectorXd& v_coords,
                                           const std::vector<double>& epsilons, int degree,
                                           const KernelPolicy& policy = {},
                                           double overflow_budget = 30.0) {
    std::vector<SweepRow> rows;
    rows.reserve(epsilons.size());
    for (double eps : epsilons) {
        SweepRow row;
        row.epsilon = eps;
        try {
            DeformationContext ctx(grid, phi, v_coords, eps, overflow_budget);
            const LinearMap lap = witten_laplacian(ctx, degree);
            SpectrumReport rep = kernel_dimension(lap, policy);
            row.cluster = low_cluster(rep.eigenvalues, rep.operator_norm);
            row.report = std::move(rep);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace folhodge
