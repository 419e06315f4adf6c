#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "grid.hpp"
#include "hodge.hpp"
#include "potential.hpp"
#include "spectral.hpp"
#include "witten.hpp"

namespace folhodge {

// Model measured foliations at desk scale. The transverse measure is a
// finite list of positive weights on sampled leaves, normalized to 1.

struct ProductSpec {
    int leaf_dim = 1;
    std::vector<int> sizes;
    std::vector<double> spacings;
    std::vector<Eigen::VectorXd> transversal_samples;  // v value per leaf
};

struct SuspensionSpec {
    long rotation_num = 0;  // exact rational rotation p'/q'
    long rotation_den = 1;
    int fiber_resolution = 32;
    int transversal_count = 1;
};

struct ChartWindowSpec {  // morse-scan only, no spectral grids
    std::vector<std::array<double, 2>> h_bounds;
    std::vector<Eigen::VectorXd> transversal_samples;
};

struct KroneckerSpec {
    double alpha = 0.0;
    std::optional<std::pair<long, long>> alpha_rational;  // exact slope when set
    int resolution = 32;
};

struct FoliationSpec {
    std::variant<ProductSpec, SuspensionSpec, ChartWindowSpec, KroneckerSpec> kind;
    std::vector<double> weights;  // empty = uniform; else positive, sum 1
};

struct LeafEntry {
    LeafGrid grid;
    double weight = 0.0;
    Eigen::VectorXd v_coords;
};

struct LeafField {
    std::vector<LeafEntry> leaves;
    FoliationSpec provenance;
};

namespace detail {

inline std::vector<double> normalized_weights(const std::vector<double>& given, size_t n) {
    std::vector<double> w;
    if (given.empty()) {
        w.assign(n, 1.0 / static_cast<double>(n));
    } else {
        if (given.size() != n)
            throw std::invalid_argument("FoliationSpec: weight count does not match samples");
        double sum = 0.0;
        for (double x : given) {
            if (!(x > 0.0))
                throw std::invalid_argument("FoliationSpec: weights must be strictly positive");
            sum += x;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("FoliationSpec: weights must sum to 1");
        w = given;
    }
    return w;
}

}  // namespace detail

inline LeafField instantiate_model(const FoliationSpec& spec) {
    LeafField field;
    field.provenance = spec;

    if (const auto* prod = std::get_if<ProductSpec>(&spec.kind)) {
        if (prod->transversal_samples.empty())
            throw std::invalid_argument("Product model: need at least one transversal sample");
        auto w = detail::normalized_weights(spec.weights, prod->transversal_samples.size());
        for (size_t j = 0; j < prod->transversal_samples.size(); ++j)
            field.leaves.push_back({build_leaf_grid(prod->leaf_dim, prod->sizes, prod->spacings),
                                    w[j], prod->transversal_samples[j]});
        return field;
    }
    if (const auto* susp = std::get_if<SuspensionSpec>(&spec.kind)) {
        if (susp->rotation_den <= 0)
            throw std::invalid_argument(
                "Suspension model: rotation must be an exact rational p/q with q > 0; "
                "irrational rotations have non-compact leaves, use the Kronecker global "
                "complex instead");
        const long q = susp->rotation_den / std::gcd(std::abs(susp->rotation_num),
                                                     susp->rotation_den);
        const int n = static_cast<int>(q) * susp->fiber_resolution;
        auto w = detail::normalized_weights(spec.weights,
                                            static_cast<size_t>(susp->transversal_count));
        for (int j = 0; j < susp->transversal_count; ++j) {
            Eigen::VectorXd v(1);
            v[0] = susp->transversal_count == 1
                       ? 0.0
                       : static_cast<double>(j) / susp->transversal_count;
            field.leaves.push_back(
                {build_leaf_grid(1, {n}, {1.0 / n}), w[j], v});
        }
        return field;
    }
    if (std::get_if<ChartWindowSpec>(&spec.kind))
        throw std::invalid_argument(
            "instantiate_model: chart-window models carry no spectral grids; they are "
            "for morse-scan use only");
    throw std::invalid_argument(
        "instantiate_model: Kronecker models are handled by kronecker_tangential_complex");
}

// Lambda-averaged kernel dimension of the (deformed) degree-k Laplacian:
// the Murray-von Neumann dimension of the sampled field.
inline double lambda_dimension(const LeafField& field, int k, double epsilon = 0.0,
                               const TrigPotential* phi = nullptr,
                               const KernelPolicy& policy = {}) {
    double acc = 0.0;
    for (const auto& entry : field.leaves) {
        std::vector<int> betti;
        if (phi) {
            betti = betti_numbers(entry.grid, epsilon, phi, entry.v_coords, policy);
        } else {
            betti = betti_numbers(entry.grid, 0.0, nullptr, {}, policy);
        }
        acc += entry.weight * betti.at(static_cast<size_t>(k));
    }
    return acc;
}

inline double lambda_euler_characteristic(const LeafField& field, double epsilon = 0.0,
                                          const TrigPotential* phi = nullptr,
                                          const KernelPolicy& policy = {}) {
    if (field.leaves.empty()) return 0.0;
    const int p = field.leaves.front().grid.dim_p();
    double acc = 0.0;
    for (int k = 0; k <= p; ++k)
        acc += (k % 2 == 0 ? 1.0 : -1.0) * lambda_dimension(field, k, epsilon, phi, policy);
    return acc;
}

// Global tangential complex of the Kronecker flow of slope alpha on the
// 2-torus, in the frequency domain: mode (m, n) is scaled by 2*pi*i*(m+alpha*n).
struct KroneckerReport {
    int kernel_dim = 0;
    int cokernel_dim = 0;
    double min_nonzero_divisor = std::numeric_limits<double>::infinity();
};

inline KroneckerReport kronecker_tangential_complex(const KroneckerSpec& spec) {
    const int n = spec.resolution;
    if (n < 8) throw std::invalid_argument("kronecker: resolution must be >= 8");
    KroneckerReport rep;
    const int lo = -(n - 1) / 2;  // -N/2 < m <= N/2
    for (int m = lo; m <= n / 2; ++m)
        for (int k = lo; k <= n / 2; ++k) {
            bool zero;
            double divisor;
            if (spec.alpha_rational) {
                // Exact integer test: m + (p/q) k = 0  <=>  m q + p k = 0.
                const long lhs = static_cast<long>(m) * spec.alpha_rational->second +
                                 spec.alpha_rational->first * static_cast<long>(k);
                zero = lhs == 0;
                divisor = std::abs(static_cast<double>(lhs)) /
                          static_cast<double>(spec.alpha_rational->second);
            } else {
                divisor = std::abs(m + spec.alpha * k);
                zero = divisor <= 1e-12;
            }
            if (zero) {
                rep.kernel_dim += 1;
                rep.cokernel_dim += 1;  // diagonal operator: kernel and cokernel match
            } else {
                rep.min_nonzero_divisor = std::min(rep.min_nonzero_divisor, divisor);
            }
        }
    return rep;
}

inline KroneckerReport kronecker_tangential_complex(double alpha, int resolution) {
    KroneckerSpec spec;
    spec.alpha = alpha;
    spec.resolution = resolution;
    return kronecker_tangential_complex(spec);
}

}  // namespace folhodge
