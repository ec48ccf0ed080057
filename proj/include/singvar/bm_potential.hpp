#pragma once

// Q-tensor bulk potentials: the Landau-de Gennes polynomial and the
// Ball-Majumdar maximum-entropy potential psi(Q), evaluated through its
// concave dual g(Lambda) = Lambda:(Q + I/3) - log Z(Lambda) with
// Z(Lambda) = integral of exp(p' Lambda p) over the sphere.

#include <memory>

#include "singvar/potentials.hpp"
#include "singvar/qtensor.hpp"
#include "singvar/sphere_quadrature.hpp"

namespace singvar {

// 5-vector coordinates of a Q-tensor and back.
Vec qtensor_coords(const QTensor& Q);
QTensor coords_qtensor(const Vec& q);

// Gram matrix G_ij = tr(E_i E_j) of the coordinate basis.
const Mat& qtensor_gram();

struct DualSolveResult {
    QTensor lambda;         // maximizer of the dual
    double psi = 0.0;       // dual value = psi(Q)
    int iterations = 0;
    double moment_residual = 0.0; // ||<p p' - I/3> - Q||_F at the solution
};

// Newton with backtracking on the dual; throws NearBoundary if Q has
// eigenvalue margin < 1e-6, DualDiverged on non-convergence.
DualSolveResult bm_dual_solve(const QTensor& Q, const SphereRule& rule, double tol,
                              int max_iter = 100);

// f_B(Q) = (a/2) tr Q^2 + (b/3) tr Q^3 + (c/4) (tr Q^2)^2 in 5 coordinates.
// Smooth everywhere; not singular (baseline comparisons only).
class LdgPolynomial final : public SingularPotential {
public:
    LdgPolynomial(double a, double b, double c);

    int dim() const override { return 5; }
    double value(const Vec& q) const override;
    Vec gradient(const Vec& q) const override;
    Mat hessian(const Vec& q) const override;
    double margin(const Vec&) const override { return kInf; }
    Vec interior_anchor() const override { return Vec(5, 0.0); }
    double max_margin() const override { return kInf; }
    bool is_singular() const override { return false; }

private:
    double a_, b_, c_;
};

std::shared_ptr<LdgPolynomial> ldg_polynomial(double a, double b, double c);

// f_B(Q) = T psi(Q) - kappa |Q|_F^2; gradient via the envelope theorem
// (d psi / dQ = Lambda*), Hessian via the dual covariance.
class BallMajumdarPotential final : public SingularPotential {
public:
    BallMajumdarPotential(SphereRule rule, double kappa, double T,
                          double solve_tol = 1e-10, int max_iter = 100);

    int dim() const override { return 5; }
    double value(const Vec& q) const override;
    Vec gradient(const Vec& q) const override;
    Mat hessian(const Vec& q) const override;
    double margin(const Vec& q) const override;
    Vec interior_anchor() const override { return Vec(5, 0.0); }
    double max_margin() const override { return 1.0 / 3.0; }

    double psi(const Vec& q) const;
    const SphereRule& rule() const { return rule_; }

private:
    SphereRule rule_;
    double kappa_, T_, solve_tol_;
    int max_iter_;
};

std::shared_ptr<BallMajumdarPotential> bm_potential(SphereRule rule, double kappa,
                                                    double T);

} // namespace singvar
