#include "singvar/regularity.hpp"

#include <algorithm>
#include <cmath>

#include "singvar/energy.hpp"
#include "singvar/errors.hpp"

namespace singvar {

namespace {

double max_spacing(const Grid& g) {
    double m = 0.0;
    for (int a = 0; a < g.n; ++a) m = std::max(m, g.h[a]);
    return m;
}

void check_ball(const Grid& g, const std::vector<double>& x, double r) {
    if (static_cast<int>(x.size()) != g.n)
        throw Error("ball_means: center dimension mismatch");
    if (r < 2.0 * max_spacing(g))
        throw TooFewCells("ball_means: radius below 2h");
    for (int a = 0; a < g.n; ++a) {
        const double lo = g.origin[a], hi = g.origin[a] + g.h[a] * (g.shape[a] - 1);
        if (x[a] - r < lo - 1e-12 || x[a] + r > hi + 1e-12)
            throw BallOutsideDomain("ball_means: B(x,r) leaves the grid box");
    }
}

// Cells whose centers lie in B(x,r).
std::vector<long> ball_cells(const Grid& g, const std::vector<double>& x, double r) {
    std::vector<long> out;
    const long nc = g.num_cells();
    for (long c = 0; c < nc; ++c) {
        auto ctr = g.cell_center(g.cell_coords(c));
        double d2 = 0.0;
        for (int a = 0; a < g.n; ++a) d2 += (ctr[a] - x[a]) * (ctr[a] - x[a]);
        if (d2 <= r * r) out.push_back(c);
    }
    return out;
}

Vec cell_average(const Field& f, const std::vector<int>& idx) {
    const Grid& g = f.grid;
    const int corners = 1 << g.n;
    Vec z(f.k, 0.0);
    for (int c = 0; c < corners; ++c) {
        auto corner = idx;
        for (int a = 0; a < g.n; ++a)
            if (c & (1 << a)) corner[a] += 1;
        const long id = g.node_index(corner);
        for (int a = 0; a < f.k; ++a) z[a] += f.node(id)[a];
    }
    for (double& v : z) v /= corners;
    return z;
}

Mat cell_gradient(const Field& f, const std::vector<int>& idx) {
    const Grid& g = f.grid;
    Mat P(f.k, g.n);
    const long base = g.node_index(idx);
    for (int a = 0; a < g.n; ++a) {
        auto nb = idx;
        nb[a] += 1;
        const long other = g.node_index(nb);
        for (int comp = 0; comp < f.k; ++comp)
            P(comp, a) = (f.node(other)[comp] - f.node(base)[comp]) / g.h[a];
    }
    return P;
}

// Multilinear interpolation of f at p (clamped to the grid box).
Vec interpolate(const Field& f, const std::vector<double>& p) {
    const Grid& g = f.grid;
    std::vector<int> base(g.n);
    std::vector<double> w(g.n);
    for (int a = 0; a < g.n; ++a) {
        double t = (p[a] - g.origin[a]) / g.h[a];
        t = std::clamp(t, 0.0, static_cast<double>(g.shape[a] - 1));
        int i = std::min(static_cast<int>(t), g.shape[a] - 2);
        base[a] = i;
        w[a] = t - i;
    }
    Vec out(f.k, 0.0);
    const int corners = 1 << g.n;
    for (int c = 0; c < corners; ++c) {
        auto corner = base;
        double wc = 1.0;
        for (int a = 0; a < g.n; ++a) {
            if (c & (1 << a)) {
                corner[a] += 1;
                wc *= w[a];
            } else {
                wc *= 1.0 - w[a];
            }
        }
        const long id = g.node_index(corner);
        for (int a = 0; a < f.k; ++a) out[a] += wc * f.node(id)[a];
    }
    return out;
}

} // namespace

std::pair<Vec, Mat> ball_means(const Field& f, const std::vector<double>& x, double r) {
    const Grid& g = f.grid;
    check_ball(g, x, r);
    auto cells = ball_cells(g, x, r);
    if (cells.empty()) throw TooFewCells("ball_means: no cell centers in the ball");

    Vec u_mean(f.k, 0.0);
    Mat du_mean(f.k, g.n);
    for (long c : cells) {
        auto idx = g.cell_coords(c);
        Vec z = cell_average(f, idx);
        Mat P = cell_gradient(f, idx);
        for (int a = 0; a < f.k; ++a) u_mean[a] += z[a];
        du_mean += P;
    }
    for (double& v : u_mean) v /= cells.size();
    du_mean *= 1.0 / cells.size();
    return {std::move(u_mean), std::move(du_mean)};
}

ExcessReport excess(const Field& f, const std::vector<double>& x,
                    const std::vector<double>& radii) {
    const Grid& g = f.grid;
    ExcessReport rep;
    rep.x = x;
    rep.radii = radii;
    for (double r : radii) {
        check_ball(g, x, r);
        auto cells = ball_cells(g, x, r);
        if (cells.empty()) throw TooFewCells("excess: no cell centers in the ball");
        Vec u_mean(f.k, 0.0);
        Mat du_mean(f.k, g.n);
        std::vector<Mat> grads;
        grads.reserve(cells.size());
        for (long c : cells) {
            auto idx = g.cell_coords(c);
            Vec z = cell_average(f, idx);
            for (int a = 0; a < f.k; ++a) u_mean[a] += z[a];
            grads.push_back(cell_gradient(f, idx));
            du_mean += grads.back();
        }
        for (double& v : u_mean) v /= cells.size();
        du_mean *= 1.0 / cells.size();

        double dev = 0.0;
        for (const Mat& P : grads) {
            for (std::size_t i = 0; i < P.rows(); ++i)
                for (std::size_t j = 0; j < P.cols(); ++j) {
                    const double d = P(i, j) - du_mean(i, j);
                    dev += d * d;
                }
        }
        dev /= cells.size();

        rep.r_half.push_back(std::sqrt(r));
        rep.deviation.push_back(dev);
        rep.excess.push_back(std::sqrt(r) + dev);
        rep.u_means.push_back(std::move(u_mean));
        rep.du_means.push_back(std::move(du_mean));
    }
    return rep;
}

double decay_sweep(const Field& f, const std::vector<double>& x, double r, double tau) {
    if (!(tau > 0.0) || !(tau <= 0.125))
        throw Error("decay_sweep: tau must lie in (0, 1/8]");
    ExcessReport rep = excess(f, x, {r, tau * r});
    return rep.excess[1] / (std::sqrt(tau) * rep.excess[0]);
}

Field blowup_rescale(const Field& f, const std::vector<double>& x, double r,
                     double lambda) {
    if (!(lambda > 0.0)) throw Error("blowup_rescale: lambda must be positive");
    const Grid& g = f.grid;
    auto [a, A] = ball_means(f, x, r);

    int m = 2 * static_cast<int>(std::ceil(r / max_spacing(g))) + 1;
    m = std::max(m, 5);
    Grid out_grid(g.n, std::vector<int>(g.n, m),
                  std::vector<double>(g.n, 2.0 / (m - 1)),
                  std::vector<double>(g.n, -1.0));

    Field out(out_grid, f.k);
    const long nn = out_grid.num_nodes();
    for (long id = 0; id < nn; ++id) {
        auto idx = out_grid.node_coords(id);
        auto z = out_grid.node_position(idx);
        std::vector<double> p(g.n);
        for (int ax = 0; ax < g.n; ++ax) p[ax] = x[ax] + r * z[ax];
        Vec u = interpolate(f, p);
        for (int comp = 0; comp < f.k; ++comp) {
            double affine = a[comp];
            for (int ax = 0; ax < g.n; ++ax) affine += r * A(comp, ax) * z[ax];
            out.node(id)[comp] = (u[comp] - affine) / (lambda * r);
        }
        out.boundary_mask[id] = out_grid.on_boundary(idx) ? 1 : 0;
    }
    return out;
}

Field clamp_truncate(const Field& f, double M) {
    if (!(M > 0.0)) throw Error("clamp_truncate: M must be positive");
    Field out = f;
    for (double& v : out.values) v = std::clamp(v, -M, M);
    return out;
}

Field difference_quotient(const Field& f, int axis, int h_steps) {
    const Grid& g = f.grid;
    if (axis < 0 || axis >= g.n) throw Error("difference_quotient: bad axis");
    if (h_steps < 1 || h_steps >= g.shape[axis])
        throw StepTooLarge("difference_quotient: h_steps out of range");

    auto shape = g.shape;
    shape[axis] -= h_steps;
    Grid out_grid(g.n, shape, g.h, g.origin);
    Field out(out_grid, f.k);
    const double step = h_steps * g.h[axis];

    const long nn = out_grid.num_nodes();
    for (long id = 0; id < nn; ++id) {
        auto idx = out_grid.node_coords(id);
        const long lo = g.node_index(idx);
        auto hi_idx = idx;
        hi_idx[axis] += h_steps;
        const long hi = g.node_index(hi_idx);
        for (int comp = 0; comp < f.k; ++comp)
            out.node(id)[comp] = (f.node(hi)[comp] - f.node(lo)[comp]) / step;
        out.boundary_mask[id] = out_grid.on_boundary(idx) ? 1 : 0;
    }
    return out;
}

namespace {

// Piecewise-linear box cutoff: 1 on the inner fraction of the domain, 0
// outside the outer fraction, measured in the scaled max-norm from the center.
double cutoff(const Grid& g, const std::vector<double>& p, double inner_frac,
              double outer_frac) {
    double t = 0.0;
    for (int a = 0; a < g.n; ++a) {
        const double half = 0.5 * g.h[a] * (g.shape[a] - 1);
        const double c = g.origin[a] + half;
        t = std::max(t, std::fabs(p[a] - c) / half);
    }
    if (t <= inner_frac) return 1.0;
    if (t >= outer_frac) return 0.0;
    return (outer_frac - t) / (outer_frac - inner_frac);
}

} // namespace

H2Report h2_estimate(const Field& f, double inner_frac, double outer_frac,
                     const std::vector<int>& h_steps) {
    if (!(0.0 < inner_frac && inner_frac < outer_frac && outer_frac < 1.0))
        throw Error("h2_estimate: need 0 < inner_frac < outer_frac < 1");
    const Grid& g = f.grid;
    H2Report rep;
    rep.inner_frac = inner_frac;
    rep.outer_frac = outer_frac;
    rep.h_steps = h_steps;
    rep.energies.assign(g.n, std::vector<double>(h_steps.size(), 0.0));

    const double cv = g.cell_volume();
    const long nc = g.num_cells();
    std::vector<Mat> grads;
    grads.reserve(nc);
    for (long c = 0; c < nc; ++c) grads.push_back(cell_gradient(f, g.cell_coords(c)));

    for (int axis = 0; axis < g.n; ++axis) {
        for (std::size_t si = 0; si < h_steps.size(); ++si) {
            const int s = h_steps[si];
            if (s < 1 || s >= g.shape[axis] - 1)
                throw StepTooLarge("h2_estimate: h_steps out of range");
            const double step = s * g.h[axis];
            double e = 0.0;
            for (long c = 0; c < nc; ++c) {
                auto idx = g.cell_coords(c);
                if (idx[axis] + s >= g.shape[axis] - 1) continue;
                auto sh = idx;
                sh[axis] += s;
                const Mat& P0 = grads[c];
                const Mat& P1 = grads[g.cell_index(sh)];
                double d2 = 0.0;
                for (std::size_t i = 0; i < P0.rows(); ++i)
                    for (std::size_t j = 0; j < P0.cols(); ++j) {
                        const double d = (P1(i, j) - P0(i, j)) / step;
                        d2 += d * d;
                    }
                const double xi = cutoff(g, g.cell_center(idx), inner_frac, outer_frac);
                e += cv * xi * xi * d2;
            }
            rep.energies[axis][si] = e;
        }
    }

    double ratio = 1.0;
    for (int axis = 0; axis < g.n; ++axis) {
        double lo = kInf, hi = 0.0;
        for (double e : rep.energies[axis]) {
            lo = std::min(lo, e);
            hi = std::max(hi, e);
        }
        if (hi > 1e-14) ratio = std::max(ratio, hi / std::max(lo, 1e-300));
    }
    rep.stability_ratio = ratio;
    return rep;
}

RegularityReport classify_regular(const Field& f, const SingularPotential& pot,
                                  double L, double tau, double eta, double r0,
                                  double ratio_cap,
                                  const std::vector<int>& dim_scales) {
    if (!(tau > 0.0) || !(tau <= 0.125))
        throw Error("classify_regular: tau must lie in (0, 1/8]");
    if (!(eta > 0.0)) throw Error("classify_regular: eta must be positive");
    const Grid& g = f.grid;
    if (r0 < 4.0 * max_spacing(g))
        throw TooFewCells("classify_regular: r0 below 4h");

    RegularityReport rep;
    rep.L = L;
    rep.tau = tau;
    rep.eta = eta;
    rep.r0 = r0;
    rep.ratio_cap = ratio_cap;
    const long nn = g.num_nodes();
    rep.status.assign(nn, NodeStatus::Regular);
    rep.evaluated.assign(nn, 0);

    const double hmax = max_spacing(g);
    for (long id = 0; id < nn; ++id) {
        auto idx = g.node_coords(id);
        auto x = g.node_position(idx);
        bool fits = true;
        for (int a = 0; a < g.n; ++a) {
            const double lo = g.origin[a], hi = g.origin[a] + g.h[a] * (g.shape[a] - 1);
            if (x[a] - r0 < lo - 1e-12 || x[a] + r0 > hi + 1e-12) fits = false;
        }
        if (!fits) continue;
        rep.evaluated[id] = 1;

        std::vector<double> radii{r0};
        while (radii.back() * tau >= 2.0 * hmax) radii.push_back(radii.back() * tau);
        ExcessReport ex = excess(f, x, radii);

        bool regular = true;
        const Vec& um = ex.u_means[0];
        if (norm2(um) > L || ex.du_means[0].frobenius() > L) regular = false;
        if (regular) {
            const double fv = pot.value(um);
            if (!std::isfinite(fv) || std::fabs(fv) > L) regular = false;
        }
        if (regular && ex.excess[0] > eta) regular = false;
        for (std::size_t l = 1; regular && l < radii.size(); ++l) {
            const double cap = std::pow(ratio_cap * std::sqrt(tau), static_cast<double>(l)) * eta;
            if (ex.excess[l] > cap) regular = false;
        }
        if (!regular) {
            rep.status[id] = NodeStatus::Suspect;
            ++rep.suspect_count;
        }
    }

    if (rep.suspect_count > 0 && dim_scales.size() >= 3) {
        std::vector<char> mask(nn, 0);
        for (long id = 0; id < nn; ++id)
            if (rep.status[id] == NodeStatus::Suspect) mask[id] = 1;
        BoxDimension bd = box_dimension(g, mask, dim_scales);
        rep.suspect_dimension = bd.dimension;
        rep.dimension_counts = bd.counts;
    }
    return rep;
}

BoxDimension box_dimension(const Grid& g, const std::vector<char>& mask,
                           const std::vector<int>& scales) {
    if (scales.size() < 3) throw Error("box_dimension: need at least 3 scales");
    BoxDimension bd;

    bool any = false;
    for (char c : mask)
        if (c) any = true;
    if (!any) {
        bd.empty_set = true;
        for (int s : scales) bd.counts.emplace_back(s, 0);
        return bd;
    }

    const long nn = g.num_nodes();
    for (int s : scales) {
        if (s < 1) throw Error("box_dimension: scales must be positive");
        std::vector<long> blocks;
        for (long id = 0; id < nn; ++id) {
            if (!mask[id]) continue;
            auto idx = g.node_coords(id);
            long key = 0;
            for (int a = 0; a < g.n; ++a) {
                const long nb = (g.shape[a] + s - 1) / s;
                key = key * nb + idx[a] / s;
            }
            blocks.push_back(key);
        }
        std::sort(blocks.begin(), blocks.end());
        blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());
        bd.counts.emplace_back(s, static_cast<long>(blocks.size()));
    }

    // least-squares slope of log(count) against log(1/scale)
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(bd.counts.size());
    for (auto [s, cnt] : bd.counts) {
        const double lx = std::log(1.0 / s);
        const double ly = std::log(static_cast<double>(std::max<long>(cnt, 1)));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = m * sxx - sx * sx;
    bd.dimension = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
    return bd;
}

} // namespace singvar
