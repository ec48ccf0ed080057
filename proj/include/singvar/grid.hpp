#pragma once

// Uniform grids on axis-aligned boxes and vector-valued fields with Dirichlet
// boundary masks. Snapshot format: one header line "n k shape h origin",
// then one line of k values per node in index-major order.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "singvar/linalg.hpp"

namespace singvar {

struct Grid {
    int n = 1;                  // spatial dimension (1..3)
    std::vector<int> shape;     // nodes per axis, each >= 2
    std::vector<double> h;      // spacing per axis, > 0
    std::vector<double> origin; // lower corner of the box

    Grid() = default;
    Grid(int n_, std::vector<int> shape_, std::vector<double> h_,
         std::vector<double> origin_);

    static Grid unit_box(int n, int nodes_per_axis);

    long num_nodes() const;
    long num_cells() const;

    long node_index(const std::vector<int>& idx) const;
    std::vector<int> node_coords(long id) const;
    std::vector<double> node_position(const std::vector<int>& idx) const;

    long cell_index(const std::vector<int>& idx) const;
    std::vector<int> cell_coords(long id) const;
    std::vector<double> cell_center(const std::vector<int>& idx) const;

    double cell_volume() const;
    bool on_boundary(const std::vector<int>& idx) const;
};

struct Field {
    Grid grid;
    int k = 1;
    Vec values;                        // num_nodes * k, node-major
    std::vector<std::uint8_t> boundary_mask; // 1 = Dirichlet-fixed

    Field() = default;
    Field(Grid g, int k_);

    double* node(long id) { return values.data() + static_cast<std::size_t>(id) * k; }
    const double* node(long id) const {
        return values.data() + static_cast<std::size_t>(id) * k;
    }
    Vec node_value(long id) const {
        return Vec(node(id), node(id) + k);
    }
    void set_node(long id, const Vec& v) {
        for (int a = 0; a < k; ++a) node(id)[a] = v[a];
    }
};

// Field with values from gen(x) everywhere and the box faces marked Dirichlet.
Field make_field(const Grid& g, int k,
                 const std::function<Vec(const std::vector<double>&)>& gen);

// Trapezoid quadrature weight per node (product of h, halved on faces).
Vec node_weights(const Grid& g);

void save_field(const Field& f, const std::string& path);
Field load_field(const std::string& path);

// Discrete norms: L2 uses trapezoid node weights, H1 adds the cell-gradient
// seminorm.
double l2_norm(const Field& f);
double h1_norm(const Field& f);
double h1_distance(const Field& a, const Field& b);

} // namespace singvar
