#pragma once

// Grid discretization of I[v] = int F(v, Dv) + f(v) dx. F is evaluated per
// cell at the corner-forward-difference gradient and the corner-average of v;
// f is evaluated per node with trapezoid weights. energy_gradient is the
// exact derivative of energy_value.

#include <memory>

#include "singvar/grid.hpp"
#include "singvar/potentials.hpp"

namespace singvar {

class EnergyDensity {
public:
    virtual ~EnergyDensity() = default;

    virtual int k() const = 0;
    virtual int n() const = 0;
    virtual double value(const Vec& z, const Mat& P) const = 0;
    virtual Mat dP(const Vec& z, const Mat& P) const = 0;
    // Action of d2F/dP2 on a direction R.
    virtual Mat dP2_apply(const Vec& z, const Mat& P, const Mat& R) const = 0;
    virtual Vec dz(const Vec& z, const Mat& P) const { return Vec(k(), 0.0); }
    virtual double dz_lipschitz() const { return 0.0; }
    virtual double convexity_modulus() const = 0; // gamma > 0: uniformly convex
};

// F(P) = |P|^2.
class DirichletDensity final : public EnergyDensity {
public:
    DirichletDensity(int k, int n) : k_(k), n_(n) {}
    int k() const override { return k_; }
    int n() const override { return n_; }
    double value(const Vec&, const Mat& P) const override;
    Mat dP(const Vec&, const Mat& P) const override;
    Mat dP2_apply(const Vec&, const Mat&, const Mat& R) const override;
    double convexity_modulus() const override { return 2.0; }

private:
    int k_, n_;
};

// F(P) = |P|^2 + sum log cosh(P_ai): smooth, uniformly convex, non-quadratic,
// with bounded second derivatives.
class LogCoshDensity final : public EnergyDensity {
public:
    LogCoshDensity(int k, int n) : k_(k), n_(n) {}
    int k() const override { return k_; }
    int n() const override { return n_; }
    double value(const Vec&, const Mat& P) const override;
    Mat dP(const Vec&, const Mat& P) const override;
    Mat dP2_apply(const Vec&, const Mat& P, const Mat& R) const override;
    double convexity_modulus() const override { return 2.0; }

    // Dense d2F(P), used to seed the constant-coefficient elliptic solver.
    Mat hessian_dense(const Mat& P) const;

private:
    int k_, n_;
};

// F(z, P) = (1 + beta w(z)) |P|^2 with |w| <= 1, Lip(w) <= 1.
class ZDependentDensity final : public EnergyDensity {
public:
    ZDependentDensity(int k, int n, double beta,
                      std::function<double(const Vec&)> w,
                      std::function<Vec(const Vec&)> grad_w);
    int k() const override { return k_; }
    int n() const override { return n_; }
    double value(const Vec& z, const Mat& P) const override;
    Mat dP(const Vec& z, const Mat& P) const override;
    Mat dP2_apply(const Vec& z, const Mat&, const Mat& R) const override;
    Vec dz(const Vec& z, const Mat& P) const override;
    double dz_lipschitz() const override { return 2.0 * std::fabs(beta_); }
    double convexity_modulus() const override { return 2.0 * (1.0 - std::fabs(beta_)); }

private:
    int k_, n_;
    double beta_;
    std::function<double(const Vec&)> w_;
    std::function<Vec(const Vec&)> grad_w_;
};

// F_{A,lambda}(P) = (F(A + lambda P) - F(A) - lambda dF(A):P) / lambda^2.
std::shared_ptr<EnergyDensity> rescaled_density(std::shared_ptr<const EnergyDensity> base,
                                                const Mat& A, double lambda);

std::shared_ptr<EnergyDensity> z_dependent_density(
    int k, int n, double beta, std::function<double(const Vec&)> w,
    std::function<Vec(const Vec&)> grad_w);

struct DiscreteEnergy {
    std::shared_ptr<const EnergyDensity> density;
    std::shared_ptr<const SingularPotential> potential; // may be null (f == 0)
};

// One k x n gradient per cell: forward differences from the cell's lower
// corner along each axis.
std::vector<Mat> gradient_field(const Field& f);

double energy_value(const DiscreteEnergy& de, const Field& f);

// Exact derivative of energy_value w.r.t. node values; zero on Dirichlet
// nodes. Throws BoundaryContact if a node has margin <= 0 under a singular
// potential.
Vec energy_gradient(const DiscreteEnergy& de, const Field& f);

} // namespace singvar
