#include "singvar/grid.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "singvar/energy.hpp"
#include "singvar/errors.hpp"

namespace singvar {

Grid::Grid(int n_, std::vector<int> shape_, std::vector<double> h_,
           std::vector<double> origin_)
    : n(n_), shape(std::move(shape_)), h(std::move(h_)), origin(std::move(origin_)) {
    if (n < 1 || n > 3) throw Error("Grid: dimension must be 1, 2 or 3");
    if (static_cast<int>(shape.size()) != n || static_cast<int>(h.size()) != n ||
        static_cast<int>(origin.size()) != n)
        throw Error("Grid: shape/h/origin size mismatch");
    for (int a = 0; a < n; ++a) {
        if (shape[a] < 2) throw Error("Grid: need at least 2 nodes per axis");
        if (!(h[a] > 0.0)) throw Error("Grid: spacing must be positive");
    }
}

Grid Grid::unit_box(int n, int nodes_per_axis) {
    std::vector<int> shape(n, nodes_per_axis);
    std::vector<double> h(n, 1.0 / (nodes_per_axis - 1));
    std::vector<double> origin(n, 0.0);
    return Grid(n, shape, h, origin);
}

long Grid::num_nodes() const {
    long s = 1;
    for (int a = 0; a < n; ++a) s *= shape[a];
    return s;
}

long Grid::num_cells() const {
    long s = 1;
    for (int a = 0; a < n; ++a) s *= shape[a] - 1;
    return s;
}

long Grid::node_index(const std::vector<int>& idx) const {
    long id = 0;
    for (int a = 0; a < n; ++a) id = id * shape[a] + idx[a];
    return id;
}

std::vector<int> Grid::node_coords(long id) const {
    std::vector<int> idx(n);
    for (int a = n - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(id % shape[a]);
        id /= shape[a];
    }
    return idx;
}

std::vector<double> Grid::node_position(const std::vector<int>& idx) const {
    std::vector<double> x(n);
    for (int a = 0; a < n; ++a) x[a] = origin[a] + h[a] * idx[a];
    return x;
}

long Grid::cell_index(const std::vector<int>& idx) const {
    long id = 0;
    for (int a = 0; a < n; ++a) id = id * (shape[a] - 1) + idx[a];
    return id;
}

std::vector<int> Grid::cell_coords(long id) const {
    std::vector<int> idx(n);
    for (int a = n - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(id % (shape[a] - 1));
        id /= shape[a] - 1;
    }
    return idx;
}

std::vector<double> Grid::cell_center(const std::vector<int>& idx) const {
    std::vector<double> x(n);
    for (int a = 0; a < n; ++a) x[a] = origin[a] + h[a] * (idx[a] + 0.5);
    return x;
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < n; ++a) v *= h[a];
    return v;
}

bool Grid::on_boundary(const std::vector<int>& idx) const {
    for (int a = 0; a < n; ++a)
        if (idx[a] == 0 || idx[a] == shape[a] - 1) return true;
    return false;
}

Field::Field(Grid g, int k_) : grid(std::move(g)), k(k_) {
    values.assign(static_cast<std::size_t>(grid.num_nodes()) * k, 0.0);
    boundary_mask.assign(grid.num_nodes(), 0);
}

Field make_field(const Grid& g, int k,
                 const std::function<Vec(const std::vector<double>&)>& gen) {
    Field f(g, k);
    const long nn = g.num_nodes();
    for (long id = 0; id < nn; ++id) {
        auto idx = g.node_coords(id);
        f.set_node(id, gen(g.node_position(idx)));
        f.boundary_mask[id] = g.on_boundary(idx) ? 1 : 0;
    }
    return f;
}

Vec node_weights(const Grid& g) {
    const long nn = g.num_nodes();
    Vec w(nn, 1.0);
    for (long id = 0; id < nn; ++id) {
        auto idx = g.node_coords(id);
        for (int a = 0; a < g.n; ++a) {
            double wa = g.h[a];
            if (idx[a] == 0 || idx[a] == g.shape[a] - 1) wa *= 0.5;
            w[id] *= wa;
        }
    }
    return w;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

void save_field(const Field& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("save_field: cannot open " + path);
    const Grid& g = f.grid;
    out << g.n << ' ' << f.k;
    for (int a = 0; a < g.n; ++a) out << ' ' << g.shape[a];
    for (int a = 0; a < g.n; ++a) out << ' ' << format_double(g.h[a]);
    for (int a = 0; a < g.n; ++a) out << ' ' << format_double(g.origin[a]);
    out << '\n';
    const long nn = g.num_nodes();
    for (long id = 0; id < nn; ++id) {
        for (int a = 0; a < f.k; ++a) {
            if (a) out << ' ';
            out << format_double(f.node(id)[a]);
        }
        out << '\n';
    }
}

Field load_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_field: cannot open " + path);
    int n, k;
    if (!(in >> n >> k)) throw IoError("load_field: bad header");
    std::vector<int> shape(n);
    std::vector<double> h(n), origin(n);
    for (int a = 0; a < n; ++a) in >> shape[a];
    for (int a = 0; a < n; ++a) in >> h[a];
    for (int a = 0; a < n; ++a) in >> origin[a];
    if (!in) throw IoError("load_field: bad header");
    Field f(Grid(n, shape, h, origin), k);
    const long nn = f.grid.num_nodes();
    for (long id = 0; id < nn; ++id)
        for (int a = 0; a < k; ++a)
            if (!(in >> f.node(id)[a])) throw IoError("load_field: truncated data");
    for (long id = 0; id < nn; ++id)
        f.boundary_mask[id] = f.grid.on_boundary(f.grid.node_coords(id)) ? 1 : 0;
    return f;
}

double l2_norm(const Field& f) {
    Vec w = node_weights(f.grid);
    double s = 0.0;
    const long nn = f.grid.num_nodes();
    for (long id = 0; id < nn; ++id)
        for (int a = 0; a < f.k; ++a) s += w[id] * f.node(id)[a] * f.node(id)[a];
    return std::sqrt(s);
}

double h1_norm(const Field& f) {
    double s = l2_norm(f);
    s *= s;
    auto grads = gradient_field(f);
    const double cv = f.grid.cell_volume();
    for (const Mat& p : grads) {
        double fr = p.frobenius();
        s += cv * fr * fr;
    }
    return std::sqrt(s);
}

double h1_distance(const Field& a, const Field& b) {
    Field d = a;
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values[i];
    return h1_norm(d);
}

} // namespace singvar
