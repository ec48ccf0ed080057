#pragma once

// Fixed-node quadrature on the unit sphere: Gauss-Legendre in cos(theta)
// crossed with a uniform (trapezoid) rule in phi. Weights carry surface
// measure, so they sum to 4*pi.

#include <array>
#include <vector>

#include "singvar/errors.hpp"

namespace singvar {

struct SphereRule {
    std::vector<std::array<double, 3>> nodes; // unit vectors
    std::vector<double> weights;              // positive, sum = 4*pi

    template <class F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
        return s;
    }
};

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

// n_theta Gauss-Legendre points in cos(theta) times n_phi uniform points in
// phi. Throws RuleTooCoarse below (2, 4). Even n_phi makes the node set
// antipodally symmetric.
SphereRule product_rule(int n_theta, int n_phi);

inline SphereRule default_sphere_rule() { return product_rule(24, 48); }

} // namespace singvar
