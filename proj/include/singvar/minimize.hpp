#pragma once

// Interiority-preserving descent for the discrete energy: Armijo backtracking
// with a fraction-to-boundary cap (each accepted step keeps every node margin
// above (1 - theta) times its current value), an optional limited-memory
// quasi-Newton direction, the eta-homotopy, and the constant-coefficient
// elliptic solve.

#include <vector>

#include "singvar/energy.hpp"

namespace singvar {

enum class DescentMethod { GradientDescent, LBFGS };

struct SolveOptions {
    double tol = 1e-8;            // stopping threshold on the interior gradient norm
    int max_iter = 200000;
    double backtrack = 0.5;
    double armijo = 1e-4;
    double fraction_to_boundary = 0.95; // theta in (0,1)
    DescentMethod method = DescentMethod::GradientDescent;
    int lbfgs_memory = 10;
    bool record_trace = true;
};

struct SolveReport {
    int iterations = 0;
    double grad_norm = 0.0;
    double energy = 0.0;
    double min_margin = kInf; // over nodes, singular potentials only
    bool converged = false;
    std::vector<double> energy_trace;
};

// Throws InfeasibleStart if the initial field has infinite energy.
std::pair<Field, SolveReport> minimize(const DiscreteEnergy& de, const Field& initial,
                                       const SolveOptions& opts);

struct HomotopyStage {
    double eta;
    Field field;
    double h1_delta; // discrete H1 distance to the previous stage (0 for the first)
    SolveReport report;
};

// Solves the f^eta problems down a strictly decreasing schedule, warm-starting
// each stage from the previous solution.
std::vector<HomotopyStage> homotopy_minimize(
    std::shared_ptr<const EnergyDensity> density,
    std::shared_ptr<const MarginFormPotential> base_potential,
    const std::vector<double>& eta_schedule, const Field& initial,
    const SolveOptions& opts);

// Minimizes the quadratic form sum_cells (1/2) P : A : P over interior nodes
// (conjugate gradients, matrix-free). A is (k*n) x (k*n) acting on vec(P)
// row-major; must satisfy the Legendre condition (checked by sampling).
// The boundary values of `boundary` are held fixed.
Field solve_linear_elliptic(const Mat& A_coeff, const Grid& grid, const Field& boundary,
                            double tol = 1e-12, int max_iter = -1);

} // namespace singvar
