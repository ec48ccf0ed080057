#pragma once

// Pointwise-regularity diagnostics on discrete fields: ball means, excess and
// its decay across dyadic scales, blow-up rescaling, clamping, difference
// quotients, cutoff H2-type energies, a regular/suspect node classifier, and
// a box-counting dimension estimate for the suspect set.

#include <memory>

#include "singvar/grid.hpp"
#include "singvar/potentials.hpp"

namespace singvar {

// Means of u (corner averages) and Du (cell gradients) over the cells whose
// centers lie in B(x, r). Throws BallOutsideDomain / TooFewCells.
std::pair<Vec, Mat> ball_means(const Field& f, const std::vector<double>& x, double r);

struct ExcessReport {
    std::vector<double> x;
    std::vector<double> radii;
    std::vector<double> excess;    // sqrt(r) + deviation
    std::vector<double> r_half;    // sqrt(r)
    std::vector<double> deviation; // mean |Du - (Du)_{x,r}|^2
    std::vector<Vec> u_means;
    std::vector<Mat> du_means;
};

ExcessReport excess(const Field& f, const std::vector<double>& x,
                    const std::vector<double>& radii);

// E(x, tau*r) / (sqrt(tau) * E(x, r)), tau in (0, 1/8].
double decay_sweep(const Field& f, const std::vector<double>& x, double r, double tau);

// v(z) = (u(x + r z) - a - r A z) / (lambda r) on [-1,1]^n with
// a = (u)_{x,r}, A = (Du)_{x,r}; multilinear resampling.
Field blowup_rescale(const Field& f, const std::vector<double>& x, double r,
                     double lambda);

// Componentwise clamp of node values to [-M, M].
Field clamp_truncate(const Field& f, double M);

// Forward difference quotient along one axis with step h_steps * grid.h;
// the grid shrinks by h_steps nodes along that axis.
Field difference_quotient(const Field& f, int axis, int h_steps);

struct H2Report {
    double inner_frac = 0.0;
    double outer_frac = 0.0;
    std::vector<int> h_steps;
    // energies[axis][i] = int xi^2 |D_axis^{h_i} Du|^2
    std::vector<std::vector<double>> energies;
    double stability_ratio = 1.0; // max over axes of max/min across h
};

H2Report h2_estimate(const Field& f, double inner_frac, double outer_frac,
                     const std::vector<int>& h_steps);

enum class NodeStatus : unsigned char { Regular = 0, Suspect = 1 };

struct RegularityReport {
    std::vector<NodeStatus> status; // per node
    std::vector<char> evaluated;    // 0 where B(x, r0) does not fit
    double L = 0.0, tau = 0.0, eta = 0.0, r0 = 0.0, ratio_cap = 0.0;
    long suspect_count = 0;
    double suspect_dimension = 0.0; // box-counting estimate, 0 if suspect set empty
    std::vector<std::pair<int, long>> dimension_counts;
};

// A node is Regular iff |(u)_{x,r0}|, |f((u)_{x,r0})|, |(Du)_{x,r0}| <= L,
// E(x,r0) <= eta, and E(x, tau^l r0) <= (ratio_cap sqrt(tau))^l eta for all
// grid-computable levels l >= 1. Nodes whose ball does not fit are skipped
// (Regular, evaluated = 0).
RegularityReport classify_regular(const Field& f, const SingularPotential& pot,
                                  double L, double tau, double eta, double r0,
                                  double ratio_cap,
                                  const std::vector<int>& dim_scales = {1, 2, 4, 8});

struct BoxDimension {
    double dimension = 0.0;
    std::vector<std::pair<int, long>> counts; // (scale in nodes, occupied boxes)
    bool empty_set = false;
};

// Least-squares slope of log(count) vs log(1/scale) over node-block coverings.
BoxDimension box_dimension(const Grid& g, const std::vector<char>& mask,
                           const std::vector<int>& scales);

} // namespace singvar
