// Experiment driver: assembles problems from a config file and emits field
// snapshots, CSV reports, and a run manifest.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "singvar/bm_potential.hpp"
#include "singvar/config.hpp"
#include "singvar/energy.hpp"
#include "singvar/errors.hpp"
#include "singvar/minimize.hpp"
#include "singvar/qtensor.hpp"
#include "singvar/regularity.hpp"

namespace fs = std::filesystem;
using namespace singvar;

namespace {

constexpr const char* kVersion = "singvar 1.0";

struct Args {
    std::string subcommand;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
};

Args parse_args(int argc, char** argv) {
    Args a;
    for (int i = 1; i < argc; ++i) {
        std::string s = argv[i];
        auto next = [&]() -> std::string {
            if (++i >= argc) throw ConfigError("flag " + s + " needs a value");
            return argv[i];
        };
        if (s == "--config") {
            a.config_path = next();
        } else if (s == "--set") {
            a.overrides.push_back(next());
        } else if (s == "--out") {
            a.out_dir = next();
        } else if (s == "--seed") {
            a.seed = std::stoull(next());
        } else if (s == "--threads") {
            next(); // single-threaded build; accepted for interface stability
        } else if (!s.empty() && s[0] == '-') {
            throw ConfigError("unknown flag " + s);
        } else if (a.subcommand.empty()) {
            a.subcommand = s;
        } else {
            throw ConfigError("unexpected argument " + s);
        }
    }
    if (a.subcommand.empty())
        throw ConfigError(
            "usage: singvar <minimize|homotopy|psi-table|excess|classify|h2|"
            "growth-check|elliptic|calibrate> [--config path] [--set k=v] "
            "[--out dir] [--seed n] [--threads n]");
    return a;
}

Grid build_grid(const Config& cfg) {
    const int n = cfg.get_int("problem.n", 1);
    const int nodes = cfg.get_int("problem.nodes", 65);
    return Grid::unit_box(n, nodes);
}

std::function<Vec(const std::vector<double>&)> build_generator(const Config& cfg,
                                                               int k, int n) {
    const std::string name = cfg.get_string("bc.name", "affine");
    if (name == "affine") {
        Vec a = cfg.get_doubles("bc.a", Vec(k, 0.0));
        Vec A = cfg.get_doubles("bc.A", Vec(static_cast<std::size_t>(k) * n, 0.0));
        if (static_cast<int>(a.size()) != k ||
            static_cast<int>(A.size()) != k * n)
            throw ConfigError("bc.a / bc.A size mismatch");
        return [=](const std::vector<double>& x) {
            Vec v = a;
            for (int c = 0; c < k; ++c)
                for (int ax = 0; ax < n; ++ax) v[c] += A[c * n + ax] * x[ax];
            return v;
        };
    }
    if (name == "sinusoidal") {
        const double amp = cfg.get_double("bc.amp", 0.1);
        const double freq = cfg.get_double("bc.freq", 1.0);
        return [=](const std::vector<double>& x) {
            double s = 0.0;
            for (double xi : x) s += xi;
            Vec v(k);
            for (int c = 0; c < k; ++c) v[c] = amp * std::sin(M_PI * freq * s + c);
            return v;
        };
    }
    if (name == "ramp") {
        // first component ramps from lo to hi along the first axis
        const double lo = cfg.get_double("bc.lo", -0.9);
        const double hi = cfg.get_double("bc.hi", 0.9);
        return [=](const std::vector<double>& x) {
            Vec v(k, 0.0);
            v[0] = lo + (hi - lo) * x[0];
            return v;
        };
    }
    if (name == "uniaxial-rotation") {
        if (k != 5) throw ConfigError("bc uniaxial-rotation needs k = 5");
        const double s = cfg.get_double("bc.s", 0.3);
        const double omega = cfg.get_double("bc.omega", M_PI);
        return [=](const std::vector<double>& x) {
            const double t = omega * x[0];
            QTensor Q = uniaxial(s, {std::cos(t), std::sin(t), 0.0});
            auto c = Q.to_components();
            return Vec(c.begin(), c.end());
        };
    }
    throw ConfigError("unknown bc.name: " + name);
}

std::shared_ptr<const SingularPotential> build_potential(const Config& cfg, int k) {
    const std::string name = cfg.get_string("problem.potential", "none");
    if (name == "none") return nullptr;
    if (name == "log_ball") return log_ball(k);
    if (name == "inverse_square")
        return inverse_square(std::make_shared<BallMargin>(k),
                              cfg.get_double("problem.potential_gamma", 1.0));
    if (name == "ldg")
        return ldg_polynomial(cfg.get_double("problem.ldg_a", -1.0),
                              cfg.get_double("problem.ldg_b", -2.0),
                              cfg.get_double("problem.ldg_c", 2.0));
    if (name == "bm") {
        if (k != 5) throw ConfigError("bm potential needs k = 5");
        auto rule = product_rule(cfg.get_int("problem.rule_theta", 24),
                                 cfg.get_int("problem.rule_phi", 48));
        return bm_potential(rule, cfg.get_double("problem.kappa", 1.0),
                            cfg.get_double("problem.T", 1.0));
    }
    throw ConfigError("unknown problem.potential: " + name);
}

std::shared_ptr<const EnergyDensity> build_density(const Config& cfg, int k, int n) {
    const std::string name = cfg.get_string("problem.density", "dirichlet");
    if (name == "dirichlet") return std::make_shared<DirichletDensity>(k, n);
    if (name == "logcosh") return std::make_shared<LogCoshDensity>(k, n);
    if (name == "zdep") {
        const double beta = cfg.get_double("problem.beta", 0.5);
        return z_dependent_density(
            k, n, beta, [](const Vec& z) { return std::tanh(z[0]); },
            [](const Vec& z) {
                Vec g(z.size(), 0.0);
                const double t = std::tanh(z[0]);
                g[0] = 1.0 - t * t;
                return g;
            });
    }
    throw ConfigError("unknown problem.density: " + name);
}

SolveOptions build_solve_options(const Config& cfg) {
    SolveOptions o;
    o.tol = cfg.get_double("solver.tol", 1e-8);
    o.max_iter = cfg.get_int("solver.max_iter", 200000);
    o.backtrack = cfg.get_double("solver.backtrack", 0.5);
    o.armijo = cfg.get_double("solver.armijo", 1e-4);
    o.fraction_to_boundary = cfg.get_double("solver.theta", 0.95);
    const std::string m = cfg.get_string("solver.method", "gd");
    if (m == "gd")
        o.method = DescentMethod::GradientDescent;
    else if (m == "lbfgs")
        o.method = DescentMethod::LBFGS;
    else
        throw ConfigError("unknown solver.method: " + m);
    return o;
}

Field build_field(const Config& cfg) {
    if (cfg.has("field.path")) return load_field(cfg.get_string("field.path"));
    Grid g = build_grid(cfg);
    const int k = cfg.get_int("problem.k", 1);
    return make_field(g, k, build_generator(cfg, k, g.n));
}

void write_solve_report(const std::string& path, const SolveReport& rep) {
    CsvWriter csv(path, {"key", "value"});
    csv.row({"iterations", std::to_string(rep.iterations)});
    csv.row({"grad_norm", format_double(rep.grad_norm)});
    csv.row({"energy", format_double(rep.energy)});
    csv.row({"min_margin", format_double(rep.min_margin)});
    csv.row({"converged", rep.converged ? "1" : "0"});
}

void write_trace(const std::string& path, const std::vector<double>& trace) {
    CsvWriter csv(path, {"iter", "energy"});
    for (std::size_t i = 0; i < trace.size(); ++i)
        csv.row_numeric({static_cast<double>(i), trace[i]});
}

// --- subcommands -----------------------------------------------------------

void cmd_minimize(const Config& cfg, const fs::path& out) {
    Field start = build_field(cfg);
    const Grid& g = start.grid;
    DiscreteEnergy de{build_density(cfg, start.k, g.n),
                      build_potential(cfg, start.k)};
    auto [sol, rep] = minimize(de, start, build_solve_options(cfg));
    save_field(sol, (out / "solution.field").string());
    write_trace((out / "trace.csv").string(), rep.energy_trace);
    write_solve_report((out / "report.csv").string(), rep);
}

void cmd_homotopy(const Config& cfg, const fs::path& out) {
    Field start = build_field(cfg);
    const Grid& g = start.grid;
    auto pot = build_potential(cfg, start.k);
    auto base = std::dynamic_pointer_cast<const MarginFormPotential>(pot);
    if (!base) throw ConfigError("homotopy needs a margin-form problem.potential");
    auto schedule = cfg.get_doubles("solver.eta_schedule");
    auto stages = homotopy_minimize(build_density(cfg, start.k, g.n), base, schedule,
                                    start, build_solve_options(cfg));
    CsvWriter csv((out / "stages.csv").string(),
                  {"stage", "eta", "energy", "grad_norm", "iterations", "h1_delta"});
    for (std::size_t i = 0; i < stages.size(); ++i)
        csv.row_numeric({static_cast<double>(i), stages[i].eta, stages[i].report.energy,
                         stages[i].report.grad_norm,
                         static_cast<double>(stages[i].report.iterations),
                         stages[i].h1_delta});
    save_field(stages.back().field, (out / "solution.field").string());
}

void cmd_psi_table(const Config& cfg, const fs::path& out) {
    const int count = cfg.get_int("table.count", 21);
    const double min_margin = cfg.get_double("table.min_margin", 0.02);
    auto rule = product_rule(cfg.get_int("problem.rule_theta", 24),
                             cfg.get_int("problem.rule_phi", 48));
    const double tol = cfg.get_double("table.tol", 1e-10);
    CsvWriter csv((out / "psi.csv").string(),
                  {"lambda1", "lambda2", "psi", "lambda_frobenius", "newton_iters"});
    for (int i = 0; i < count; ++i) {
        const double l1 = -0.5 + i * (1.0 / (count - 1));
        for (int j = 0; j < count; ++j) {
            const double l2 = -0.5 + j * (1.0 / (count - 1));
            QTensor Q = QTensor::from_components({l1, 0.0, l2, 0.0, 0.0});
            if (eigen_margin(Q) < min_margin) continue;
            auto res = bm_dual_solve(Q, rule, tol);
            csv.row_numeric({l1, l2, res.psi, res.lambda.frobenius(),
                             static_cast<double>(res.iterations)});
        }
    }
}

void cmd_excess(const Config& cfg, const fs::path& out) {
    Field f = build_field(cfg);
    auto centers = cfg.get_doubles("diagnostics.centers");
    auto radii = cfg.get_doubles("diagnostics.radii");
    const int n = f.grid.n;
    if (centers.size() % n != 0)
        throw ConfigError("diagnostics.centers length must be a multiple of n");
    CsvWriter csv((out / "excess.csv").string(),
                  {"center", "r", "E", "r_half_term", "deviation"});
    for (std::size_t c = 0; c * n < centers.size(); ++c) {
        std::vector<double> x(centers.begin() + c * n, centers.begin() + (c + 1) * n);
        ExcessReport rep = excess(f, x, radii);
        for (std::size_t i = 0; i < radii.size(); ++i)
            csv.row_numeric({static_cast<double>(c), rep.radii[i], rep.excess[i],
                             rep.r_half[i], rep.deviation[i]});
    }
}

void cmd_classify(const Config& cfg, const fs::path& out) {
    Field f = build_field(cfg);
    auto pot = build_potential(cfg, f.k);
    if (!pot) throw ConfigError("classify needs problem.potential");
    RegularityReport rep = classify_regular(
        f, *pot, cfg.get_double("diagnostics.L", 10.0),
        cfg.get_double("diagnostics.tau", 0.125), cfg.get_double("diagnostics.eta", 1.0),
        cfg.get_double("diagnostics.r0", 0.25),
        cfg.get_double("diagnostics.ratio_cap", 10.0));
    const Grid& g = f.grid;
    std::vector<std::string> cols{"node"};
    for (int a = 0; a < g.n; ++a) cols.push_back("x" + std::to_string(a));
    cols.push_back("status");
    CsvWriter csv((out / "classify.csv").string(), cols);
    const long nn = g.num_nodes();
    for (long id = 0; id < nn; ++id) {
        if (!rep.evaluated[id]) continue;
        auto x = g.node_position(g.node_coords(id));
        std::vector<double> row{static_cast<double>(id)};
        row.insert(row.end(), x.begin(), x.end());
        row.push_back(rep.status[id] == NodeStatus::Suspect ? 1.0 : 0.0);
        csv.row_numeric(row);
    }
    CsvWriter summary((out / "classify_summary.csv").string(), {"key", "value"});
    summary.row({"suspect_count", std::to_string(rep.suspect_count)});
    summary.row({"suspect_dimension", format_double(rep.suspect_dimension)});
}

void cmd_h2(const Config& cfg, const fs::path& out) {
    Field f = build_field(cfg);
    H2Report rep = h2_estimate(f, cfg.get_double("diagnostics.inner_frac", 0.4),
                               cfg.get_double("diagnostics.outer_frac", 0.8),
                               cfg.get_ints("diagnostics.h_steps", {1, 2, 4}));
    CsvWriter csv((out / "h2.csv").string(), {"axis", "h_steps", "energy"});
    for (int axis = 0; axis < f.grid.n; ++axis)
        for (std::size_t i = 0; i < rep.h_steps.size(); ++i)
            csv.row_numeric({static_cast<double>(axis),
                             static_cast<double>(rep.h_steps[i]),
                             rep.energies[axis][i]});
    CsvWriter summary((out / "h2_summary.csv").string(), {"key", "value"});
    summary.row({"stability_ratio", format_double(rep.stability_ratio)});
}

void cmd_growth_check(const Config& cfg, const fs::path& out, std::uint64_t seed) {
    const int k = cfg.get_int("problem.k", 2);
    auto pot = log_ball(k);
    const double min_m = cfg.get_double("growth.min_margin", 0.2);
    const double max_m = cfg.get_double("growth.max_margin", 0.3);
    const double r = 1.0 - 0.5 * (min_m + max_m); // representative radius
    const double gamma = cfg.get_double("growth.gamma", 2.0 - 1.0 / r);
    const double c_const = cfg.get_double("growth.C", 1.0);
    const int samples = cfg.get_int("growth.samples", 1000);
    GrowthLogReport rep = check_growth_log(*pot, gamma, c_const, samples, seed,
                                           ball_sampler(k, min_m, max_m));
    CsvWriter csv((out / "growth.csv").string(),
                  {"gamma", "C", "n_samples", "worst_violation"});
    csv.row_numeric({rep.gamma, rep.c_const, static_cast<double>(rep.n_samples),
                     rep.worst_violation});
}

void cmd_elliptic(const Config& cfg, const fs::path& out) {
    Grid g = build_grid(cfg);
    const int k = cfg.get_int("problem.k", 1);
    Field bc = make_field(g, k, build_generator(cfg, k, g.n));
    const std::size_t m = static_cast<std::size_t>(k) * g.n;
    Mat A = Mat::identity(m);
    if (cfg.has("elliptic.A")) {
        auto entries = cfg.get_doubles("elliptic.A");
        if (entries.size() != m * m)
            throw ConfigError("elliptic.A must have (k*n)^2 entries");
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) A(i, j) = entries[i * m + j];
    }
    Field sol = solve_linear_elliptic(A, g, bc, cfg.get_double("elliptic.tol", 1e-12));
    save_field(sol, (out / "solution.field").string());
}

void cmd_calibrate(const Config& cfg, const fs::path& out) {
    // measure empirical excess-decay ratios on a smooth reference solve
    Grid g = build_grid(cfg);
    const int k = cfg.get_int("problem.k", 1);
    Field bc = make_field(g, k, build_generator(cfg, k, g.n));
    Field sol = solve_linear_elliptic(Mat::identity(static_cast<std::size_t>(k) * g.n),
                                      g, bc);
    auto centers = cfg.get_doubles("diagnostics.centers", {0.5, 0.5});
    const double r0 = cfg.get_double("diagnostics.r0", 0.25);
    const double tau = cfg.get_double("diagnostics.tau", 0.125);
    const int levels = cfg.get_int("diagnostics.levels", 2);
    if (centers.size() % g.n != 0)
        throw ConfigError("diagnostics.centers length must be a multiple of n");
    CsvWriter csv((out / "calibrate.csv").string(), {"center", "r", "ratio"});
    double worst = 0.0;
    for (std::size_t c = 0; c * g.n < centers.size(); ++c) {
        std::vector<double> x(centers.begin() + c * g.n,
                              centers.begin() + (c + 1) * g.n);
        double r = r0;
        for (int l = 0; l < levels; ++l) {
            const double ratio = decay_sweep(sol, x, r, tau);
            csv.row_numeric({static_cast<double>(c), r, ratio});
            worst = std::max(worst, ratio);
            r *= tau;
            if (r * tau < 2.0 * g.h[0]) break;
        }
    }
    CsvWriter summary((out / "calibrate_summary.csv").string(), {"key", "value"});
    summary.row({"ratio_cap", format_double(worst)});
}

void write_manifest(const fs::path& out, const Config& cfg, double wall_seconds) {
    std::ofstream m(out / "manifest.txt");
    m << kVersion << "\n\n" << cfg.serialize();
    m << "\nwall_seconds = " << format_double(wall_seconds) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    try {
        Args args = parse_args(argc, argv);
        Config cfg;
        if (!args.config_path.empty()) cfg = Config::load(args.config_path);
        for (const auto& ov : args.overrides) cfg.apply_override(ov);
        if (cfg.has("run.seed")) args.seed = cfg.get_int("run.seed");
        cfg.set("run.seed", std::to_string(args.seed));
        cfg.set("run.subcommand", args.subcommand);

        fs::path out(args.out_dir);
        fs::create_directories(out);

        const auto t0 = std::chrono::steady_clock::now();
        const std::string& cmd = args.subcommand;
        if (cmd == "minimize")
            cmd_minimize(cfg, out);
        else if (cmd == "homotopy")
            cmd_homotopy(cfg, out);
        else if (cmd == "psi-table")
            cmd_psi_table(cfg, out);
        else if (cmd == "excess")
            cmd_excess(cfg, out);
        else if (cmd == "classify")
            cmd_classify(cfg, out);
        else if (cmd == "h2")
            cmd_h2(cfg, out);
        else if (cmd == "growth-check")
            cmd_growth_check(cfg, out, args.seed);
        else if (cmd == "elliptic")
            cmd_elliptic(cfg, out);
        else if (cmd == "calibrate")
            cmd_calibrate(cfg, out);
        else
            throw ConfigError("unknown subcommand: " + cmd);
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        write_manifest(out, cfg, dt.count());
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
