#pragma once

// Singular convex potentials f on a convex body K, their linearized
// regularizations f^eta, the sublevel-set projection, and the growth
// condition sampler. A potential is "margin-form" when f(z) = phi(margin(z))
// for a convex decreasing scalar barrier phi and a concave margin function
// (distance-type to the boundary of K).

#include <functional>
#include <limits>
#include <memory>
#include <random>

#include "singvar/linalg.hpp"

namespace singvar {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class SingularPotential {
public:
    virtual ~SingularPotential() = default;

    virtual int dim() const = 0;
    virtual double value(const Vec& z) const = 0; // +inf outside K
    virtual Vec gradient(const Vec& z) const = 0; // throws OutsideDomain
    virtual Mat hessian(const Vec& z) const = 0;  // throws OutsideDomain
    virtual double margin(const Vec& z) const = 0;
    virtual Vec interior_anchor() const = 0;

    virtual double max_margin() const { return margin(interior_anchor()); }
    virtual bool is_singular() const { return true; }
};

class ScalarBarrier {
public:
    virtual ~ScalarBarrier() = default;
    virtual double phi(double t) const = 0;
    virtual double dphi(double t) const = 0;
    virtual double ddphi(double t) const = 0;
};

class MarginGeometry {
public:
    virtual ~MarginGeometry() = default;
    virtual int dim() const = 0;
    virtual double margin(const Vec& z) const = 0;
    virtual Vec margin_gradient(const Vec& z) const = 0;
    virtual Mat margin_hessian(const Vec& z) const = 0;
    virtual Vec anchor() const = 0;
};

// K = unit ball, margin(z) = 1 - |z|.
class BallMargin : public MarginGeometry {
public:
    explicit BallMargin(int k) : k_(k) {}
    int dim() const override { return k_; }
    double margin(const Vec& z) const override { return 1.0 - norm2(z); }
    Vec margin_gradient(const Vec& z) const override;
    Mat margin_hessian(const Vec& z) const override;
    Vec anchor() const override { return Vec(k_, 0.0); }

private:
    int k_;
};

class MarginFormPotential : public SingularPotential {
public:
    MarginFormPotential(std::shared_ptr<const MarginGeometry> geom,
                        std::shared_ptr<const ScalarBarrier> barrier)
        : geom_(std::move(geom)), barrier_(std::move(barrier)) {}

    int dim() const override { return geom_->dim(); }
    double value(const Vec& z) const override;
    Vec gradient(const Vec& z) const override;
    Mat hessian(const Vec& z) const override;
    double margin(const Vec& z) const override { return geom_->margin(z); }
    Vec interior_anchor() const override { return geom_->anchor(); }

    const MarginGeometry& geometry() const { return *geom_; }
    const ScalarBarrier& barrier() const { return *barrier_; }
    std::shared_ptr<const MarginGeometry> geometry_ptr() const { return geom_; }
    std::shared_ptr<const ScalarBarrier> barrier_ptr() const { return barrier_; }

private:
    std::shared_ptr<const MarginGeometry> geom_;
    std::shared_ptr<const ScalarBarrier> barrier_;
};

// f^eta: phi spliced with its tangent line at t = eta. Finite everywhere,
// convex, C^1 across the splice, equal to f on { margin >= eta }.
class RegularizedPotential : public SingularPotential {
public:
    RegularizedPotential(std::shared_ptr<const MarginFormPotential> base, double eta);

    int dim() const override { return base_->dim(); }
    double value(const Vec& z) const override;
    Vec gradient(const Vec& z) const override;
    Mat hessian(const Vec& z) const override;
    double margin(const Vec& z) const override { return base_->margin(z); }
    Vec interior_anchor() const override { return base_->interior_anchor(); }
    bool is_singular() const override { return false; }

    double eta() const { return eta_; }
    const MarginFormPotential& base() const { return *base_; }

private:
    double phi_eta(double t) const;
    double dphi_eta(double t) const;
    double ddphi_eta(double t) const;

    std::shared_ptr<const MarginFormPotential> base_;
    double eta_;
};

// f(z) = -log(1 - |z|) on the unit ball of R^k.
std::shared_ptr<MarginFormPotential> log_ball(int k);

// f(z) = gamma / margin(z)^2.
std::shared_ptr<MarginFormPotential> inverse_square(
    std::shared_ptr<const MarginGeometry> geom, double gamma);

std::shared_ptr<RegularizedPotential> regularize(
    std::shared_ptr<const MarginFormPotential> f, double eta);

// Euclidean projection of z onto closure{ f < eta } via the KKT system
// w + mu grad f(w) = z, f(w) = eta, scalar root-finding in mu with an inner
// damped Newton solve. Throws EmptySublevel / ProjectionFailed.
Vec project_sublevel(const SingularPotential& f, double eta, const Vec& z);

struct GrowthLogReport {
    double gamma = 0.0;
    double c_const = 0.0;
    int n_samples = 0;
    double worst_violation = 0.0; // min over samples of C|y|^2 + y'D2f y - gamma|Df.y|^2
};

using InteriorSampler = std::function<Vec(std::mt19937_64&)>;

// Rejection sampler for the unit ball in R^k, restricted to a margin window.
InteriorSampler ball_sampler(int k, double min_margin, double max_margin = kInf);

GrowthLogReport check_growth_log(const SingularPotential& f, double gamma,
                                 double c_const, int n_samples, std::uint64_t seed,
                                 const InteriorSampler& sampler);

} // namespace singvar
