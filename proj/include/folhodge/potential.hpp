#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace folhodge {

enum class Phase { Cos, Sin };

// One trigonometric product term: coeff * prod_i phase_i(2*pi*freq_i * x_i),
// with the coordinate list split as (h_1..h_p, v_1..v_q).
struct TrigTerm {
    double coeff = 0.0;
    std::vector<int> freq_h, freq_v;
    std::vector<Phase> phase_h, phase_v;
};

// One monomial term: coeff * prod h_i^{pow_h_i} * prod v_j^{pow_v_j}.
// Only meaningful on non-periodic chart windows.
struct PolyTerm {
    double coeff = 0.0;
    std::vector<int> pow_h, pow_v;
};

// Finite trig/polynomial sum on chart coordinates (h, v). All partial
// derivatives up to third order are evaluated exactly from the term list.
class TrigPotential {
public:
    TrigPotential(int p, int q, std::vector<TrigTerm> terms,
                  std::vector<PolyTerm> poly = {})
        : p_(p), q_(q), terms_(std::move(terms)), poly_(std::move(poly)) {
        if (p_ < 0 || q_ < 0) throw std::invalid_argument("TrigPotential: negative arity");
        for (const auto& t : terms_)
            if (static_cast<int>(t.freq_h.size()) != p_ ||
                static_cast<int>(t.phase_h.size()) != p_ ||
                static_cast<int>(t.freq_v.size()) != q_ ||
                static_cast<int>(t.phase_v.size()) != q_)
                throw std::invalid_argument("TrigPotential: term arity mismatch");
        for (const auto& t : poly_)
            if (static_cast<int>(t.pow_h.size()) != p_ ||
                static_cast<int>(t.pow_v.size()) != q_)
                throw std::invalid_argument("TrigPotential: poly term arity mismatch");
    }

    int leaf_dim() const { return p_; }
    int transverse_dim() const { return q_; }
    bool empty() const { return terms_.empty() && poly_.empty(); }

    double value(const Eigen::VectorXd& h, const Eigen::VectorXd& v) const {
        return partial(h, v, std::vector<int>(p_ + q_, 0));
    }

    // Partial derivative with the given per-coordinate orders (h coords
    // first, then v coords), evaluated exactly.
    double partial(const Eigen::VectorXd& h, const Eigen::VectorXd& v,
                   const std::vector<int>& orders) const {
        if (h.size() != p_ || v.size() != q_ ||
            static_cast<int>(orders.size()) != p_ + q_)
            throw std::invalid_argument("TrigPotential: point/order arity mismatch");
        double acc = 0.0;
        for (const auto& t : terms_) {
            double prod = t.coeff;
            for (int i = 0; i < p_ && prod != 0.0; ++i)
                prod *= trig_factor(t.phase_h[i], t.freq_h[i], h[i], orders[i]);
            for (int j = 0; j < q_ && prod != 0.0; ++j)
                prod *= trig_factor(t.phase_v[j], t.freq_v[j], v[j], orders[p_ + j]);
            acc += prod;
        }
        for (const auto& t : poly_) {
            double prod = t.coeff;
            for (int i = 0; i < p_ && prod != 0.0; ++i)
                prod *= poly_factor(t.pow_h[i], h[i], orders[i]);
            for (int j = 0; j < q_ && prod != 0.0; ++j)
                prod *= poly_factor(t.pow_v[j], v[j], orders[p_ + j]);
            acc += prod;
        }
        return acc;
    }

    Eigen::VectorXd gradient_h(const Eigen::VectorXd& h, const Eigen::VectorXd& v) const {
        Eigen::VectorXd g(p_);
        std::vector<int> ord(p_ + q_, 0);
        for (int i = 0; i < p_; ++i) {
            ord[i] = 1;
            g[i] = partial(h, v, ord);
            ord[i] = 0;
        }
        return g;
    }

    Eigen::MatrixXd hessian_hh(const Eigen::VectorXd& h, const Eigen::VectorXd& v) const {
        Eigen::MatrixXd m(p_, p_);
        std::vector<int> ord(p_ + q_, 0);
        for (int i = 0; i < p_; ++i)
            for (int j = i; j < p_; ++j) {
                ord[i] += 1;
                ord[j] += 1;
                m(i, j) = m(j, i) = partial(h, v, ord);
                ord[i] = ord[j] = 0;
            }
        return m;
    }

    Eigen::MatrixXd hessian_hv(const Eigen::VectorXd& h, const Eigen::VectorXd& v) const {
        Eigen::MatrixXd m(p_, q_);
        std::vector<int> ord(p_ + q_, 0);
        for (int i = 0; i < p_; ++i)
            for (int j = 0; j < q_; ++j) {
                ord[i] = 1;
                ord[p_ + j] = 1;
                m(i, j) = partial(h, v, ord);
                ord[i] = 0;
                ord[p_ + j] = 0;
            }
        return m;
    }

    // Third directional derivative along a leafwise direction u.
    double third_directional(const Eigen::VectorXd& h, const Eigen::VectorXd& v,
                             const Eigen::VectorXd& u) const {
        double acc = 0.0;
        std::vector<int> ord(p_ + q_, 0);
        for (int i = 0; i < p_; ++i)
            for (int j = 0; j < p_; ++j)
                for (int k = 0; k < p_; ++k) {
                    ord[i] += 1;
                    ord[j] += 1;
                    ord[k] += 1;
                    acc += partial(h, v, ord) * u[i] * u[j] * u[k];
                    ord[i] = ord[j] = ord[k] = 0;
                }
        return acc;
    }

private:
    // d^n/dx^n of cos/sin(2*pi*f*x) in closed form.
    static double trig_factor(Phase ph, int freq, double x, int order) {
        const double w = 2.0 * std::numbers::pi * freq;
        const double arg = w * x + (ph == Phase::Sin ? -std::numbers::pi / 2.0 : 0.0) +
                           order * std::numbers::pi / 2.0;
        // cos(wx + n*pi/2) * w^n covers both phases via the -pi/2 offset.
        return std::pow(w, order) * std::cos(arg);
    }

    static double poly_factor(int power, double x, int order) {
        if (order > power) return 0.0;
        double c = 1.0;
        for (int n = 0; n < order; ++n) c *= static_cast<double>(power - n);
        return c * std::pow(x, power - order);
    }

    int p_, q_;
    std::vector<TrigTerm> terms_;
    std::vector<PolyTerm> poly_;
};

}  // namespace folhodge
