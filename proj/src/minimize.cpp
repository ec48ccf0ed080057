#include "singvar/minimize.hpp"

#include <cmath>
#include <deque>
#include <random>

#include "singvar/errors.hpp"

namespace singvar {

namespace {

double min_node_margin(const SingularPotential& pot, const Field& f) {
    double m = kInf;
    const long nn = f.grid.num_nodes();
    for (long id = 0; id < nn; ++id) m = std::min(m, pot.margin(f.node_value(id)));
    return m;
}

// Fraction-to-boundary: every node must keep margin >= (1-theta) * its
// current margin.
bool margins_ok(const SingularPotential& pot, const Field& cur, const Field& trial,
                double theta) {
    const long nn = cur.grid.num_nodes();
    for (long id = 0; id < nn; ++id) {
        const double m0 = pot.margin(cur.node_value(id));
        const double m1 = pot.margin(trial.node_value(id));
        if (!(m1 >= (1.0 - theta) * m0)) return false;
    }
    return true;
}

struct LbfgsHistory {
    std::deque<Vec> s, y;
    std::deque<double> rho;
    int memory;

    explicit LbfgsHistory(int m) : memory(m) {}

    void push(Vec s_new, Vec y_new) {
        const double sy = dot(s_new, y_new);
        if (sy <= 1e-12 * norm2(s_new) * norm2(y_new)) return;
        s.push_back(std::move(s_new));
        y.push_back(std::move(y_new));
        rho.push_back(1.0 / sy);
        if (static_cast<int>(s.size()) > memory) {
            s.pop_front();
            y.pop_front();
            rho.pop_front();
        }
    }

    Vec direction(const Vec& grad) const {
        Vec q = grad;
        const int m = static_cast<int>(s.size());
        std::vector<double> alpha(m);
        for (int i = m - 1; i >= 0; --i) {
            alpha[i] = rho[i] * dot(s[i], q);
            axpy(-alpha[i], y[i], q);
        }
        if (m > 0) {
            const double scale = dot(s[m - 1], y[m - 1]) / dot(y[m - 1], y[m - 1]);
            for (double& v : q) v *= scale;
        }
        for (int i = 0; i < m; ++i) {
            const double beta = rho[i] * dot(y[i], q);
            axpy(alpha[i] - beta, s[i], q);
        }
        for (double& v : q) v = -v;
        return q;
    }
};

} // namespace

std::pair<Field, SolveReport> minimize(const DiscreteEnergy& de, const Field& initial,
                                       const SolveOptions& opts) {
    const bool singular = de.potential && de.potential->is_singular();

    Field cur = initial;
    double energy = energy_value(de, cur);
    if (!std::isfinite(energy))
        throw InfeasibleStart("minimize: initial field has infinite energy");

    SolveReport rep;
    if (opts.record_trace) rep.energy_trace.push_back(energy);

    LbfgsHistory hist(opts.lbfgs_memory);
    Vec grad = energy_gradient(de, cur);
    double step_guess = 1.0;

    for (int it = 0; it < opts.max_iter; ++it) {
        rep.iterations = it;
        rep.grad_norm = norm2(grad);
        if (rep.grad_norm <= opts.tol) {
            rep.converged = true;
            break;
        }

        // Near the optimum the true decrease of a good step falls below the
        // ulp of the total energy and plain Armijo rejects every productive
        // step. In that regime accept steps that strictly shrink the
        // gradient norm instead.
        const double eps_e = 1e-14 * (1.0 + std::fabs(energy));

        bool accepted = false;
        double t = 0.0;
        Vec new_grad;
        Field trial = cur;
        const bool quasi_newton = opts.method == DescentMethod::LBFGS;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            Vec dir;
            if (attempt == 0 && quasi_newton) {
                dir = hist.direction(grad);
                if (dot(dir, grad) >= 0.0) dir = scaled(grad, -1.0);
                t = 1.0;
            } else {
                // attempt 1: quasi-Newton direction failed, fall back to
                // steepest descent with a fresh history
                if (attempt == 1) {
                    if (!quasi_newton) break;
                    hist = LbfgsHistory(opts.lbfgs_memory);
                }
                dir = scaled(grad, -1.0);
                t = quasi_newton ? 1.0 : step_guess;
            }
            const double slope = dot(grad, dir);

            for (int bt = 0; bt < 60; ++bt) {
                for (std::size_t i = 0; i < trial.values.size(); ++i)
                    trial.values[i] = cur.values[i] + t * dir[i];
                if (!singular || margins_ok(*de.potential, cur, trial,
                                            opts.fraction_to_boundary)) {
                    const double e_trial = energy_value(de, trial);
                    if (std::isfinite(e_trial)) {
                        const double pred = opts.armijo * t * slope; // < 0
                        if (-pred > eps_e) {
                            if (e_trial <= energy + pred) {
                                accepted = true;
                                break;
                            }
                        } else if (e_trial <= energy + eps_e) {
                            Vec tg = energy_gradient(de, trial);
                            if (norm2(tg) < rep.grad_norm) {
                                new_grad = std::move(tg);
                                accepted = true;
                                break;
                            }
                        }
                    }
                }
                t *= opts.backtrack;
            }
        }
        if (!accepted) break; // stagnated; report best iterate, not converged

        if (new_grad.empty()) new_grad = energy_gradient(de, trial);
        if (opts.method == DescentMethod::LBFGS)
            hist.push(vsub(trial.values, cur.values), vsub(new_grad, grad));
        else
            step_guess = 2.0 * t;

        cur = std::move(trial);
        grad = std::move(new_grad);
        energy = energy_value(de, cur);
        if (opts.record_trace) rep.energy_trace.push_back(energy);
    }

    rep.grad_norm = norm2(grad);
    rep.converged = rep.grad_norm <= opts.tol;
    rep.energy = energy;
    if (de.potential) rep.min_margin = min_node_margin(*de.potential, cur);
    return {std::move(cur), rep};
}

std::vector<HomotopyStage> homotopy_minimize(
    std::shared_ptr<const EnergyDensity> density,
    std::shared_ptr<const MarginFormPotential> base_potential,
    const std::vector<double>& eta_schedule, const Field& initial,
    const SolveOptions& opts) {
    const double m_max = base_potential->max_margin();
    for (std::size_t i = 0; i < eta_schedule.size(); ++i) {
        if (!(eta_schedule[i] > 0.0) || !(eta_schedule[i] < m_max))
            throw InvalidEta("homotopy_minimize: eta outside (0, m_max)");
        if (i > 0 && !(eta_schedule[i] < eta_schedule[i - 1]))
            throw InvalidEta("homotopy_minimize: schedule must be strictly decreasing");
    }

    std::vector<HomotopyStage> stages;
    Field start = initial;
    for (std::size_t i = 0; i < eta_schedule.size(); ++i) {
        DiscreteEnergy de{density, regularize(base_potential, eta_schedule[i])};
        auto [field, report] = minimize(de, start, opts);
        HomotopyStage stage{eta_schedule[i], std::move(field), 0.0, std::move(report)};
        if (i > 0) stage.h1_delta = h1_distance(stage.field, stages.back().field);
        start = stage.field;
        stages.push_back(std::move(stage));
    }
    return stages;
}

namespace {

// Gradient of the quadratic form sum_cells (cv/2) vec(P)' A vec(P), zeroed on
// Dirichlet nodes.
Vec quadratic_gradient(const Mat& A, const Field& f) {
    const Grid& g = f.grid;
    const int k = f.k, n = g.n;
    const double cv = g.cell_volume();
    const long nn = g.num_nodes();
    Vec grad(static_cast<std::size_t>(nn) * k, 0.0);
    const long nc = g.num_cells();
    Vec pvec(static_cast<std::size_t>(k) * n);
    for (long c = 0; c < nc; ++c) {
        auto idx = g.cell_coords(c);
        const long base = g.node_index(idx);
        for (int a = 0; a < n; ++a) {
            auto nb = idx;
            nb[a] += 1;
            const long other = g.node_index(nb);
            for (int comp = 0; comp < k; ++comp)
                pvec[comp * n + a] = (f.node(other)[comp] - f.node(base)[comp]) / g.h[a];
        }
        Vec flux = A.apply(pvec);
        for (int a = 0; a < n; ++a) {
            auto nb = idx;
            nb[a] += 1;
            const long other = g.node_index(nb);
            for (int comp = 0; comp < k; ++comp) {
                const double v = cv * flux[comp * n + a] / g.h[a];
                grad[other * k + comp] += v;
                grad[base * k + comp] -= v;
            }
        }
    }
    for (long id = 0; id < nn; ++id)
        if (f.boundary_mask[id])
            for (int comp = 0; comp < k; ++comp) grad[id * k + comp] = 0.0;
    return grad;
}

} // namespace

Field solve_linear_elliptic(const Mat& A_coeff, const Grid& grid, const Field& boundary,
                            double tol, int max_iter) {
    const int k = boundary.k, n = grid.n;
    const std::size_t m = static_cast<std::size_t>(k) * n;
    if (A_coeff.rows() != m || A_coeff.cols() != m)
        throw Error("solve_linear_elliptic: coefficient size mismatch");

    // Legendre condition, sampled.
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int s = 0; s < 64; ++s) {
        Vec r(m);
        for (double& v : r) v = gauss(rng);
        const double quad = dot(r, A_coeff.apply(r));
        if (!(quad > 0.0))
            throw NotElliptic("solve_linear_elliptic: sampled Legendre condition fails");
    }

    Field x = boundary;
    if (max_iter < 0) max_iter = static_cast<int>(10 * grid.num_nodes() * k);

    Vec r = quadratic_gradient(A_coeff, x);
    for (double& v : r) v = -v;
    const double stop = tol * std::max(1.0, norm2(r));
    Vec p = r;
    double rr = dot(r, r);

    Field pf = x; // scratch field carrying the CG direction (zero boundary)
    for (int it = 0; it < max_iter && std::sqrt(rr) > stop; ++it) {
        pf.values = p;
        const long nn = grid.num_nodes();
        for (long id = 0; id < nn; ++id)
            if (pf.boundary_mask[id])
                for (int comp = 0; comp < k; ++comp) pf.node(id)[comp] = 0.0;
        Vec ap = quadratic_gradient(A_coeff, pf);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break;
        const double alpha = rr / pap;
        axpy(alpha, pf.values, x.values); // boundary rows of pf are zero
        axpy(-alpha, ap, r);
        const double rr_new = dot(r, r);
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
    }
    return x;
}

} // namespace singvar
