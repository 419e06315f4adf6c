#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace folhodge {

// Discretized compact leaf: a periodic structured grid of dimension p in {1,2}.
// Cell ordering is lexicographic by axis block, then row-major with the first
// axis fastest; this ordering is fixed so that operator matrices and report
// files are reproducible.
class LeafGrid {
public:
    LeafGrid(int dim_p, std::vector<int> sizes, std::vector<double> spacings,
             std::vector<bool> periodic)
        : dim_p_(dim_p), sizes_(std::move(sizes)), spacings_(std::move(spacings)),
          periodic_(std::move(periodic)) {
        if (dim_p_ != 1 && dim_p_ != 2)
            throw std::invalid_argument("LeafGrid: leaf dimension must be 1 or 2, got " +
                                        std::to_string(dim_p_));
        if (static_cast<int>(sizes_.size()) != dim_p_ ||
            static_cast<int>(spacings_.size()) != dim_p_ ||
            static_cast<int>(periodic_.size()) != dim_p_)
            throw std::invalid_argument("LeafGrid: per-axis arrays must have length dim_p");
        for (int i = 0; i < dim_p_; ++i) {
            if (sizes_[i] < 3)
                throw std::invalid_argument("LeafGrid: axis size must be >= 3, got " +
                                            std::to_string(sizes_[i]));
            if (!(spacings_[i] > 0.0))
                throw std::invalid_argument("LeafGrid: axis spacing must be positive");
        }
    }

    int dim_p() const { return dim_p_; }
    const std::vector<int>& sizes() const { return sizes_; }
    const std::vector<double>& spacings() const { return spacings_; }
    bool fully_periodic() const {
        for (bool b : periodic_)
            if (!b) return false;
        return true;
    }

    int vertex_count() const {
        int n = 1;
        for (int s : sizes_) n *= s;
        return n;
    }

    // Number of k-cells.
    int cells(int k) const {
        check_degree(k);
        int n = vertex_count();
        if (dim_p_ == 1) return n;              // k = 0 or 1, both n
        if (k == 0 || k == 2) return n;
        return 2 * n;                           // x-edge block then y-edge block
    }

    // Barycenter of the idx-th k-cell, in chart coordinates.
    Eigen::VectorXd barycenter(int k, int idx) const {
        check_degree(k);
        Eigen::VectorXd x(dim_p_);
        if (dim_p_ == 1) {
            const double h = spacings_[0];
            x[0] = (k == 0) ? idx * h : (idx + 0.5) * h;
            return x;
        }
        const int nx = sizes_[0];
        const int n = vertex_count();
        double ox = 0.0, oy = 0.0;
        if (k == 1) {
            if (idx < n) ox = 0.5;              // x-edge
            else { idx -= n; oy = 0.5; }        // y-edge
        } else if (k == 2) {
            ox = oy = 0.5;
        }
        const int i = idx % nx;
        const int j = idx / nx;
        x[0] = (i + ox) * spacings_[0];
        x[1] = (j + oy) * spacings_[1];
        return x;
    }

    int vertex_index(int i, int j = 0) const {
        wrap(i, 0);
        if (dim_p_ == 2) wrap(j, 1);
        return dim_p_ == 1 ? i : i + sizes_[0] * j;
    }
    int x_edge_index(int i, int j) const { return vertex_index(i, j); }
    int y_edge_index(int i, int j) const { return vertex_count() + vertex_index(i, j); }
    int face_index(int i, int j) const { return vertex_index(i, j); }

    // Mass (L2 quadrature) weight per k-cell; uniform flat metric, so one
    // value per degree: the chart volume of a grid cell.
    double mass_weight(int k) const {
        check_degree(k);
        double vol = 1.0;
        for (double h : spacings_) vol *= h;
        return vol;
    }

private:
    void check_degree(int k) const {
        if (k < 0 || k > dim_p_)
            throw std::invalid_argument("LeafGrid: degree " + std::to_string(k) +
                                        " out of range for p=" + std::to_string(dim_p_));
    }
    void wrap(int& i, int axis) const {
        const int n = sizes_[axis];
        i = ((i % n) + n) % n;
    }

    int dim_p_;
    std::vector<int> sizes_;
    std::vector<double> spacings_;
    std::vector<bool> periodic_;
};

inline LeafGrid build_leaf_grid(int dim_p, std::vector<int> sizes,
                                std::vector<double> spacings,
                                std::vector<bool> periodic = {}) {
    if (periodic.empty()) periodic.assign(static_cast<size_t>(dim_p), true);
    return LeafGrid(dim_p, std::move(sizes), std::move(spacings), std::move(periodic));
}

// A discrete k-form: one value per k-cell, ordered by the grid's cell tables.
struct Cochain {
    int degree = 0;
    Eigen::VectorXd values;

    Cochain() = default;
    Cochain(int k, Eigen::VectorXd v) : degree(k), values(std::move(v)) {}
};

}  // namespace folhodge
