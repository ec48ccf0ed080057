#include "singvar/potentials.hpp"

#include <cmath>

#include "singvar/errors.hpp"

namespace singvar {

Vec BallMargin::margin_gradient(const Vec& z) const {
    const double r = norm2(z);
    Vec g(k_, 0.0);
    if (r < 1e-14) return g; // subgradient choice at the center
    for (int i = 0; i < k_; ++i) g[i] = -z[i] / r;
    return g;
}

Mat BallMargin::margin_hessian(const Vec& z) const {
    const double r = norm2(z);
    Mat h(k_, k_);
    if (r < 1e-14) return h;
    for (int i = 0; i < k_; ++i)
        for (int j = 0; j < k_; ++j) {
            double proj = (i == j ? 1.0 : 0.0) - z[i] * z[j] / (r * r);
            h(i, j) = -proj / r;
        }
    return h;
}

double MarginFormPotential::value(const Vec& z) const {
    const double m = geom_->margin(z);
    if (m <= 0.0) return kInf;
    return barrier_->phi(m);
}

Vec MarginFormPotential::gradient(const Vec& z) const {
    const double m = geom_->margin(z);
    if (m <= 0.0) throw OutsideDomain("gradient: point not in the interior of K");
    Vec g = geom_->margin_gradient(z);
    const double d = barrier_->dphi(m);
    for (double& v : g) v *= d;
    return g;
}

Mat MarginFormPotential::hessian(const Vec& z) const {
    const double m = geom_->margin(z);
    if (m <= 0.0) throw OutsideDomain("hessian: point not in the interior of K");
    Vec g = geom_->margin_gradient(z);
    Mat h = geom_->margin_hessian(z);
    const double d1 = barrier_->dphi(m);
    const double d2 = barrier_->ddphi(m);
    const std::size_t k = g.size();
    Mat out(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            out(i, j) = d2 * g[i] * g[j] + d1 * h(i, j);
    return out;
}

namespace {

class LogBarrier final : public ScalarBarrier {
public:
    double phi(double t) const override { return -std::log(t); }
    double dphi(double t) const override { return -1.0 / t; }
    double ddphi(double t) const override { return 1.0 / (t * t); }
};

class InverseSquareBarrier final : public ScalarBarrier {
public:
    explicit InverseSquareBarrier(double gamma) : gamma_(gamma) {}
    double phi(double t) const override { return gamma_ / (t * t); }
    double dphi(double t) const override { return -2.0 * gamma_ / (t * t * t); }
    double ddphi(double t) const override { return 6.0 * gamma_ / (t * t * t * t); }

private:
    double gamma_;
};

} // namespace

std::shared_ptr<MarginFormPotential> log_ball(int k) {
    return std::make_shared<MarginFormPotential>(std::make_shared<BallMargin>(k),
                                                 std::make_shared<LogBarrier>());
}

std::shared_ptr<MarginFormPotential> inverse_square(
    std::shared_ptr<const MarginGeometry> geom, double gamma) {
    if (gamma <= 0.0) throw Error("inverse_square: gamma must be positive");
    return std::make_shared<MarginFormPotential>(
        std::move(geom), std::make_shared<InverseSquareBarrier>(gamma));
}

RegularizedPotential::RegularizedPotential(
    std::shared_ptr<const MarginFormPotential> base, double eta)
    : base_(std::move(base)), eta_(eta) {
    const double m_max = base_->max_margin();
    if (!(eta > 0.0) || !(eta < m_max))
        throw InvalidEta("regularize: eta must lie in (0, m_max)");
}

double RegularizedPotential::phi_eta(double t) const {
    const ScalarBarrier& b = base_->barrier();
    if (t >= eta_) return b.phi(t);
    return b.phi(eta_) + b.dphi(eta_) * (t - eta_);
}

double RegularizedPotential::dphi_eta(double t) const {
    const ScalarBarrier& b = base_->barrier();
    return t >= eta_ ? b.dphi(t) : b.dphi(eta_);
}

double RegularizedPotential::ddphi_eta(double t) const {
    const ScalarBarrier& b = base_->barrier();
    return t >= eta_ ? b.ddphi(t) : 0.0;
}

double RegularizedPotential::value(const Vec& z) const {
    return phi_eta(base_->geometry().margin(z));
}

Vec RegularizedPotential::gradient(const Vec& z) const {
    const MarginGeometry& g = base_->geometry();
    Vec grad = g.margin_gradient(z);
    const double d = dphi_eta(g.margin(z));
    for (double& v : grad) v *= d;
    return grad;
}

Mat RegularizedPotential::hessian(const Vec& z) const {
    const MarginGeometry& geom = base_->geometry();
    const double m = geom.margin(z);
    Vec g = geom.margin_gradient(z);
    Mat h = geom.margin_hessian(z);
    const double d1 = dphi_eta(m);
    const double d2 = ddphi_eta(m);
    const std::size_t k = g.size();
    Mat out(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            out(i, j) = d2 * g[i] * g[j] + d1 * h(i, j);
    return out;
}

std::shared_ptr<RegularizedPotential> regularize(
    std::shared_ptr<const MarginFormPotential> f, double eta) {
    return std::make_shared<RegularizedPotential>(std::move(f), eta);
}

namespace {

// Damped Newton on R(w) = w + mu grad f(w) - z, keeping w strictly interior.
// Returns false if the residual could not be driven below tol.
bool prox_solve(const SingularPotential& f, double mu, const Vec& z, Vec& w,
                double tol) {
    const std::size_t k = w.size();
    auto residual = [&](const Vec& p) {
        Vec g = f.gradient(p);
        Vec r(k);
        for (std::size_t i = 0; i < k; ++i) r[i] = p[i] + mu * g[i] - z[i];
        return r;
    };
    Vec r = residual(w);
    for (int it = 0; it < 200; ++it) {
        double rn = norm2(r);
        if (rn <= tol) return true;
        Mat J = f.hessian(w);
        J *= mu;
        J += Mat::identity(k);
        Vec d = J.solve(scaled(r, -1.0));
        double alpha = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            Vec trial = w;
            axpy(alpha, d, trial);
            if (f.margin(trial) > 0.0) {
                Vec rt = residual(trial);
                if (norm2(rt) < rn) {
                    w = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!accepted) return norm2(r) <= tol;
    }
    return norm2(r) <= tol;
}

} // namespace

Vec project_sublevel(const SingularPotential& f, double eta, const Vec& z) {
    const Vec anchor = f.interior_anchor();
    if (!(f.value(anchor) < eta))
        throw EmptySublevel("project_sublevel: sublevel set {f < eta} is empty");
    if (f.value(z) <= eta) return z;

    const double tol = 1e-12 * (1.0 + norm2(z));
    Vec w = anchor;

    // h(mu) = f(w(mu)) - eta is decreasing: bracket the root by doubling.
    // When mu is past the activation threshold of a conical barrier point the
    // prox solution sits on the kink and Newton stalls just short of it; the
    // stalled iterate still gives the right sign for the bracketing, and the
    // final acceptance test below guards the accuracy of the returned point.
    auto h_at = [&](double mu) {
        if (!prox_solve(f, mu, z, w, tol)) {
            w = anchor; // retry cold in case the warm start was poor
            prox_solve(f, mu, z, w, tol);
        }
        return f.value(w) - eta;
    };

    // Start at a moderate mu: tiny mu makes the prox equation stiff when z is
    // far outside K, and the bisection only reaches tiny mu with warm starts.
    double mu_lo = 0.0, mu_hi = 1.0;
    double h_hi = h_at(mu_hi);
    int guard = 0;
    while (h_hi > 0.0) {
        mu_lo = mu_hi;
        mu_hi *= 2.0;
        h_hi = h_at(mu_hi);
        if (++guard > 200)
            throw ProjectionFailed("project_sublevel: bracketing failed");
    }
    if (mu_lo == 0.0) {
        // h already negative at the smallest mu: shrink toward zero.
        while (mu_hi > 1e-18) {
            double mu = mu_hi * 0.5;
            double h = h_at(mu);
            if (h > 0.0) {
                mu_lo = mu;
                break;
            }
            mu_hi = mu;
        }
    }

    Vec best = w;
    for (int it = 0; it < 200; ++it) {
        double mu = 0.5 * (mu_lo + mu_hi);
        double h = h_at(mu);
        best = w;
        if (std::fabs(h) <= 1e-10) return best;
        if (h > 0.0)
            mu_lo = mu;
        else
            mu_hi = mu;
    }
    if (std::fabs(f.value(best) - eta) <= 1e-8) return best;
    throw ProjectionFailed("project_sublevel: root-finding did not converge");
}

InteriorSampler ball_sampler(int k, double min_margin, double max_margin) {
    return [k, min_margin, max_margin](std::mt19937_64& rng) {
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (;;) {
            Vec z(k);
            for (double& v : z) v = u(rng);
            const double m = 1.0 - norm2(z);
            if (m >= min_margin && m <= max_margin) return z;
        }
    };
}

GrowthLogReport check_growth_log(const SingularPotential& f, double gamma,
                                 double c_const, int n_samples, std::uint64_t seed,
                                 const InteriorSampler& sampler) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    GrowthLogReport rep;
    rep.gamma = gamma;
    rep.c_const = c_const;
    rep.n_samples = n_samples;
    rep.worst_violation = kInf;
    const int k = f.dim();
    for (int s = 0; s < n_samples; ++s) {
        Vec z = sampler(rng);
        Vec y(k);
        double yn = 0.0;
        do {
            for (double& v : y) v = gauss(rng);
            yn = norm2(y);
        } while (yn < 1e-12);
        for (double& v : y) v /= yn;

        Vec g = f.gradient(z);
        Mat H = f.hessian(z);
        double quad = dot(y, H.apply(y));
        double lin = dot(g, y);
        double lhs = c_const + quad - gamma * lin * lin; // |y| = 1
        rep.worst_violation = std::min(rep.worst_violation, lhs);
    }
    return rep;
}

} // namespace singvar
