#include "singvar/sphere_quadrature.hpp"

#include <cmath>

namespace singvar {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        // Newton iteration from the Chebyshev-like initial guess.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

SphereRule product_rule(int n_theta, int n_phi) {
    if (n_theta < 2 || n_phi < 4)
        throw RuleTooCoarse("product_rule: need n_theta >= 2 and n_phi >= 4");

    std::vector<double> ct, wt;
    gauss_legendre(n_theta, ct, wt);

    SphereRule rule;
    rule.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
    rule.weights.reserve(rule.nodes.capacity());
    const double wphi = 2.0 * M_PI / n_phi;
    for (int i = 0; i < n_theta; ++i) {
        const double c = ct[i];
        const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        for (int j = 0; j < n_phi; ++j) {
            const double phi = wphi * j;
            rule.nodes.push_back({s * std::cos(phi), s * std::sin(phi), c});
            rule.weights.push_back(wt[i] * wphi);
        }
    }
    return rule;
}

} // namespace singvar
