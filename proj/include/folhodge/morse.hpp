#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "potential.hpp"

namespace folhodge {

// Leaf-direction chart: either the periodic unit cube (trig potentials with
// integer frequencies) or an explicit bounded window.
struct Chart {
    bool periodic = true;
    std::vector<std::array<double, 2>> h_bounds;  // used when !periodic

    explicit Chart(int p) : h_bounds(p, {0.0, 1.0}) {}
    static Chart periodic_unit(int p) { return Chart(p); }
    static Chart window(std::vector<std::array<double, 2>> bounds) {
        Chart c(static_cast<int>(bounds.size()));
        c.periodic = false;
        c.h_bounds = std::move(bounds);
        return c;
    }
    int dim() const { return static_cast<int>(h_bounds.size()); }
    bool contains(const Eigen::VectorXd& h, double slack = 0.0) const {
        if (periodic) return true;
        for (int i = 0; i < dim(); ++i)
            if (h[i] < h_bounds[i][0] - slack || h[i] > h_bounds[i][1] + slack) return false;
        return true;
    }
};

struct MorseTolerances {
    double newton_residual = 1e-10;  // leafwise gradient norm at a reported point
    double nondegenerate_rel = 1e-8; // min |Hessian eigenvalue| / ||Hessian||
    double cubic = 1e-8;             // third directional derivative floor
    double dedup_radius = 1e-6;      // chart-unit merge distance
    int newton_max_iter = 60;
};

enum class SingularClass { Morse, BirthDeath, Degenerate };

struct SingularPoint {
    Eigen::VectorXd h_coords;
    Eigen::VectorXd v_coords;
    SingularClass classification = SingularClass::Degenerate;
    int index = -1;  // Morse index; -1 when not Morse
    Eigen::VectorXd hessian_eigenvalues;
    double newton_residual = 0.0;
    double third_derivative = 0.0;       // along the Hessian kernel, non-Morse only
    double transversality_sigma = 0.0;   // sigma_min of [f_hh | f_hv]
    bool transversality_applicable = false;
    bool transverse_escape = false;      // proof implication: Ker forces X_v != 0
};

struct LeafScan {
    Eigen::VectorXd v_coords;
    std::vector<SingularPoint> points;
    std::vector<int> index_counts;  // m_0..m_p, Morse points only
    bool all_morse = true;
    std::vector<std::string> warnings;
};

struct MorseReport {
    std::vector<LeafScan> leaves;
    double degenerate_leaf_fraction = 0.0;
};

// Exact leafwise differential of f at a chart point.
inline Eigen::VectorXd leafwise_gradient(const TrigPotential& f, const Eigen::VectorXd& h,
                                         const Eigen::VectorXd& v) {
    return f.gradient_h(h, v);
}

inline Eigen::MatrixXd tangential_hessian(const TrigPotential& f, const Eigen::VectorXd& h,
                                          const Eigen::VectorXd& v) {
    return f.hessian_hh(h, v);
}

// Morse / birth-death / degenerate decision at a singular point.
inline SingularClass classify_singularity(const TrigPotential& f, SingularPoint& pt,
                                          const MorseTolerances& tol = {}) {
    const Eigen::MatrixXd hess = tangential_hessian(f, pt.h_coords, pt.v_coords);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
    pt.hessian_eigenvalues = es.eigenvalues();
    const double min_abs = pt.hessian_eigenvalues.cwiseAbs().minCoeff();
    // Degeneracy yardstick: the Hessian's own norm is vacuous when p = 1 (a
    // fold's 2h is always "large relative to itself"), so fold detection also
    // weighs the transversal coupling and the cubic term at this point.
    Eigen::Index min_i;
    pt.hessian_eigenvalues.cwiseAbs().minCoeff(&min_i);
    const double third_probe =
        f.third_directional(pt.h_coords, pt.v_coords, es.eigenvectors().col(min_i));
    double scale = pt.hessian_eigenvalues.cwiseAbs().maxCoeff();
    scale = std::max(scale, f.hessian_hv(pt.h_coords, pt.v_coords).norm());
    scale = std::max(scale, std::abs(third_probe));

    if (scale > 0.0 && min_abs > tol.nondegenerate_rel * scale) {
        pt.classification = SingularClass::Morse;
        pt.index = static_cast<int>((pt.hessian_eigenvalues.array() < 0.0).count());
        return pt.classification;
    }
    pt.index = -1;
    // Count near-zero eigenvalues against the same relative yardstick.
    int null_count = 0;
    Eigen::VectorXd null_dir;
    for (Eigen::Index i = 0; i < pt.hessian_eigenvalues.size(); ++i)
        if (scale == 0.0 || std::abs(pt.hessian_eigenvalues[i]) <= tol.nondegenerate_rel * scale) {
            ++null_count;
            null_dir = es.eigenvectors().col(i);
        }
    if (null_count == 1) {
        pt.third_derivative = f.third_directional(pt.h_coords, pt.v_coords, null_dir);
        if (std::abs(pt.third_derivative) > tol.cubic) {
            pt.classification = SingularClass::BirthDeath;
            return pt.classification;
        }
    }
    pt.classification = SingularClass::Degenerate;
    return pt.classification;
}

// Lemma-1 style certificate: sigma_min of the p x (p+q) matrix [f_hh | f_hv].
inline void transversality_check(const TrigPotential& f, SingularPoint& pt) {
    const Eigen::MatrixXd hh = f.hessian_hh(pt.h_coords, pt.v_coords);
    const Eigen::MatrixXd hv = f.hessian_hv(pt.h_coords, pt.v_coords);
    Eigen::MatrixXd full(hh.rows(), hh.cols() + hv.cols());
    full << hh, hv;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(full);
    pt.transversality_sigma = svd.singularValues().minCoeff();
    pt.transversality_applicable = pt.classification == SingularClass::Morse;
    // At a Morse point f_hh is nonsingular, so f_hh X_h + f_hv X_v = 0 with
    // X != 0 forces X_v != 0: the singular set escapes the leaf direction.
    pt.transverse_escape = pt.transversality_applicable;
}

namespace detail {

inline double periodic_dist(const Eigen::VectorXd& a, const Eigen::VectorXd& b, bool periodic) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        double d = std::abs(a[i] - b[i]);
        if (periodic) d = std::min(d, 1.0 - d);
        acc += d * d;
    }
    return std::sqrt(acc);
}

inline std::optional<Eigen::VectorXd> newton_refine(const TrigPotential& f,
                                                    const Chart& chart,
                                                    Eigen::VectorXd h,
                                                    const Eigen::VectorXd& v,
                                                    const MorseTolerances& tol) {
    double last_step = std::numeric_limits<double>::infinity();
    for (int it = 0; it < tol.newton_max_iter; ++it) {
        Eigen::VectorXd g = f.gradient_h(h, v);
        // Accept only once the iteration has also stalled in position;
        // near a fold the gradient alone leaves an O(sqrt(tol)) error.
        if (g.norm() <= tol.newton_residual && last_step <= 1e-12) {
            if (chart.periodic)
                for (Eigen::Index i = 0; i < h.size(); ++i) {
                    h[i] -= std::floor(h[i]);
                    if (h[i] > 1.0 - 1e-9) h[i] -= 1.0;  // roots straddling the seam
                }
            if (!chart.contains(h, 1e-9)) return std::nullopt;
            return h;
        }
        Eigen::MatrixXd hess = f.hessian_hh(h, v);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(hess);
        if (!lu.isInvertible()) {
            // Degenerate Hessian near the seed; damped gradient step instead.
            h -= 1e-2 * g;
            last_step = 1e-2 * g.norm();
            continue;
        }
        Eigen::VectorXd step = lu.solve(g);
        const double cap = 0.25;  // keep Newton inside the seed's basin
        if (step.norm() > cap) step *= cap / step.norm();
        h -= step;
        last_step = step.norm();
        if (!chart.periodic && !chart.contains(h, 1.0)) return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace detail

// Scan one leaf: dense seeding on a grid, Newton refinement, dedup, classify.
inline LeafScan scan_leaf(const TrigPotential& f, const Chart& chart,
                          const Eigen::VectorXd& v, int seed_resolution,
                          const MorseTolerances& tol = {}) {
    const int p = chart.dim();
    if (seed_resolution < 8)
        throw std::invalid_argument("scan_leaf: seed_resolution must be >= 8");
    LeafScan scan;
    scan.v_coords = v;
    scan.index_counts.assign(p + 1, 0);

    // Identically-critical guard: gradient vanishes on the whole seed grid.
    double max_grad = 0.0;
    std::vector<Eigen::VectorXd> seeds;
    const int total = p == 1 ? seed_resolution : seed_resolution * seed_resolution;
    for (int s = 0; s < total; ++s) {
        Eigen::VectorXd h(p);
        int rem = s;
        for (int i = 0; i < p; ++i) {
            const int idx = rem % seed_resolution;
            rem /= seed_resolution;
            const double lo = chart.periodic ? 0.0 : chart.h_bounds[i][0];
            const double hi = chart.periodic ? 1.0 : chart.h_bounds[i][1];
            h[i] = lo + (idx + 0.5) * (hi - lo) / seed_resolution;
        }
        seeds.push_back(h);
        max_grad = std::max(max_grad, f.gradient_h(h, v).norm());
    }
    if (max_grad <= 1e-12)
        throw std::invalid_argument(
            "scan_leaf: identically-critical function on this leaf (leafwise gradient "
            "vanishes everywhere)");

    for (const auto& seed : seeds) {
        auto root = detail::newton_refine(f, chart, seed, v, tol);
        if (!root) {
            // Only worth a warning if the seed itself looked like a root region.
            if (f.gradient_h(seed, v).norm() < 1e-3 * max_grad)
                scan.warnings.push_back("Newton did not converge from a low-gradient seed");
            continue;
        }
        bool dup = false;
        for (const auto& pt : scan.points)
            if (detail::periodic_dist(pt.h_coords, *root, chart.periodic) < tol.dedup_radius) {
                dup = true;
                break;
            }
        if (dup) continue;
        SingularPoint pt;
        pt.h_coords = *root;
        pt.v_coords = v;
        pt.newton_residual = f.gradient_h(*root, v).norm();
        classify_singularity(f, pt, tol);
        transversality_check(f, pt);
        if (pt.classification == SingularClass::Morse)
            scan.index_counts[pt.index] += 1;
        else
            scan.all_morse = false;
        scan.points.push_back(std::move(pt));
    }
    std::sort(scan.points.begin(), scan.points.end(),
              [](const SingularPoint& a, const SingularPoint& b) {
                  for (Eigen::Index i = 0; i < a.h_coords.size(); ++i)
                      if (a.h_coords[i] != b.h_coords[i]) return a.h_coords[i] < b.h_coords[i];
                  return false;
              });
    return scan;
}

inline MorseReport find_tangential_singularities(const TrigPotential& f, const Chart& chart,
                                                 const std::vector<Eigen::VectorXd>& v_samples,
                                                 int seed_resolution,
                                                 const MorseTolerances& tol = {}) {
    MorseReport report;
    int degenerate = 0;
    for (const auto& v : v_samples) {
        LeafScan scan = scan_leaf(f, chart, v, seed_resolution, tol);
        if (!scan.all_morse) ++degenerate;
        report.leaves.push_back(std::move(scan));
    }
    report.degenerate_leaf_fraction =
        v_samples.empty() ? 0.0 : static_cast<double>(degenerate) / v_samples.size();
    return report;
}

// Weak and strong Morse inequalities of the per-leaf counts against Betti
// numbers, plus Euler characteristic equality.
struct MorseInequalityResult {
    bool pass = false;
    std::vector<int> violated_degrees;
    bool euler_match = false;
    int euler_morse = 0, euler_betti = 0;
};

inline MorseInequalityResult morse_inequalities(const std::vector<int>& counts,
                                                const std::vector<int>& betti) {
    if (counts.size() != betti.size())
        throw std::invalid_argument("morse_inequalities: count/betti length mismatch");
    MorseInequalityResult res;
    const int p = static_cast<int>(counts.size()) - 1;
    for (int k = 0; k <= p; ++k) {
        if (counts[k] < betti[k]) res.violated_degrees.push_back(k);
        int lhs = 0, rhs = 0;
        for (int i = 0; i <= k; ++i) {
            const int s = ((k - i) % 2 == 0) ? 1 : -1;
            lhs += s * counts[i];
            rhs += s * betti[i];
        }
        if (lhs < rhs &&
            std::find(res.violated_degrees.begin(), res.violated_degrees.end(), k) ==
                res.violated_degrees.end())
            res.violated_degrees.push_back(k);
    }
    for (int k = 0; k <= p; ++k) {
        const int s = (k % 2 == 0) ? 1 : -1;
        res.euler_morse += s * counts[k];
        res.euler_betti += s * betti[k];
    }
    res.euler_match = res.euler_morse == res.euler_betti;
    res.pass = res.violated_degrees.empty() && res.euler_match;
    return res;
}

inline MorseInequalityResult morse_inequalities(const MorseReport& report,
                                                const std::vector<int>& betti) {
    for (const auto& leaf : report.leaves)
        if (!leaf.all_morse)
            throw std::invalid_argument(
                "morse_inequalities: degenerate leaves present; run almost_morse_audit");
    MorseInequalityResult agg;
    agg.pass = true;
    for (const auto& leaf : report.leaves) {
        MorseInequalityResult r = morse_inequalities(leaf.index_counts, betti);
        if (!r.pass) return r;
        agg = r;
    }
    return agg;
}

// Audit of Definition-2/3 behavior at sample resolution.
enum class AuditVerdict { Good, GoodAlmostMorse, Indeterminate, NotGood };

struct AlmostMorseAudit {
    double degenerate_leaf_fraction = 0.0;
    std::vector<int> flagged_samples;  // indices into the v-sample list
    AuditVerdict verdict = AuditVerdict::Good;
    MorseReport report;
};

inline AlmostMorseAudit almost_morse_audit(const TrigPotential& f, const Chart& chart,
                                           const std::vector<Eigen::VectorXd>& v_samples,
                                           int seed_resolution,
                                           const MorseTolerances& tol = {}) {
    AlmostMorseAudit audit;
    audit.report = find_tangential_singularities(f, chart, v_samples, seed_resolution, tol);
    audit.degenerate_leaf_fraction = audit.report.degenerate_leaf_fraction;
    bool any_plain_degenerate = false;
    for (int i = 0; i < static_cast<int>(audit.report.leaves.size()); ++i) {
        const auto& leaf = audit.report.leaves[i];
        if (!leaf.all_morse) {
            audit.flagged_samples.push_back(i);
            for (const auto& pt : leaf.points)
                if (pt.classification == SingularClass::Degenerate) any_plain_degenerate = true;
        }
    }
    if (audit.flagged_samples.empty()) {
        audit.verdict = AuditVerdict::Good;
    } else if (any_plain_degenerate || audit.degenerate_leaf_fraction >= 1.0) {
        audit.verdict = AuditVerdict::NotGood;
    } else {
        bool adjacent = false;
        for (size_t i = 0; i + 1 < audit.flagged_samples.size(); ++i)
            if (audit.flagged_samples[i + 1] == audit.flagged_samples[i] + 1) adjacent = true;
        audit.verdict = adjacent ? AuditVerdict::Indeterminate : AuditVerdict::GoodAlmostMorse;
    }
    return audit;
}

}  // namespace folhodge
