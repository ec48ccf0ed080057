#include "singvar/bm_potential.hpp"

#include <array>
#include <cmath>

#include "singvar/errors.hpp"

namespace singvar {

Vec qtensor_coords(const QTensor& Q) {
    auto q = Q.to_components();
    return Vec(q.begin(), q.end());
}

QTensor coords_qtensor(const Vec& q) {
    return QTensor::from_components({q[0], q[1], q[2], q[3], q[4]});
}

const Mat& qtensor_gram() {
    static const Mat g = [] {
        Mat m(5, 5);
        m(0, 0) = 2;
        m(1, 1) = 2;
        m(2, 2) = 2;
        m(3, 3) = 2;
        m(4, 4) = 2;
        m(0, 2) = m(2, 0) = 1;
        return m;
    }();
    return g;
}

namespace {

// m_i(p) = p' E_i p for the five basis matrices E_i = dQ/dq_i.
inline std::array<double, 5> basis_quadratic(const std::array<double, 3>& p) {
    return {p[0] * p[0] - p[2] * p[2], 2.0 * p[0] * p[1], p[1] * p[1] - p[2] * p[2],
            2.0 * p[0] * p[2], 2.0 * p[1] * p[2]};
}

struct DualState {
    Vec lambda{Vec(5, 0.0)};
    double psi = 0.0;
    int iterations = 0;
    double residual = 0.0;
    Mat covariance{5, 5}; // Cov(m_i, m_j) under the optimal density
};

struct Moments {
    double log_z;
    std::array<double, 5> mean;           // <m_i>
    Mat second{5, 5};                     // <m_i m_j>
    std::array<std::array<double, 3>, 3> M{}; // <p p'>
};

Moments moments_at(const SphereRule& rule, const Vec& lambda, bool full) {
    const std::size_t n = rule.nodes.size();
    // Stabilize exponentials against the largest exponent.
    double emax = -kInf;
    std::vector<double> expo(n);
    std::vector<std::array<double, 5>> mv(n);
    for (std::size_t i = 0; i < n; ++i) {
        mv[i] = basis_quadratic(rule.nodes[i]);
        double e = 0.0;
        for (int j = 0; j < 5; ++j) e += lambda[j] * mv[i][j];
        expo[i] = e;
        emax = std::max(emax, e);
    }
    Moments mom{};
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = rule.weights[i] * std::exp(expo[i] - emax);
        z += w;
        for (int a = 0; a < 5; ++a) mom.mean[a] += w * mv[i][a];
        if (full) {
            for (int a = 0; a < 5; ++a)
                for (int b = a; b < 5; ++b) mom.second(a, b) += w * mv[i][a] * mv[i][b];
            const auto& p = rule.nodes[i];
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) mom.M[a][b] += w * p[a] * p[b];
        }
    }
    mom.log_z = emax + std::log(z);
    for (int a = 0; a < 5; ++a) mom.mean[a] /= z;
    if (full) {
        for (int a = 0; a < 5; ++a)
            for (int b = a; b < 5; ++b) {
                mom.second(a, b) /= z;
                mom.second(b, a) = mom.second(a, b);
            }
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) mom.M[a][b] /= z;
    }
    return mom;
}

DualState solve_dual(const QTensor& Q, const SphereRule& rule, double tol,
                     int max_iter) {
    if (eigen_margin(Q) < 1e-6)
        throw NearBoundary("bm_dual_solve: Q too close to the eigenvalue bounds");

    const Vec q = qtensor_coords(Q);
    const Vec t = qtensor_gram().apply(q); // t_i = tr(E_i Q)

    DualState st;
    auto dual_value = [&](const Vec& lambda) {
        Moments m = moments_at(rule, lambda, false);
        return dot(lambda, t) - m.log_z;
    };

    double g_cur = dual_value(st.lambda);
    for (int it = 0; it < max_iter; ++it) {
        Moments m = moments_at(rule, st.lambda, true);

        // Moment residual in matrix form.
        double res2 = 0.0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                double d = m.M[a][b] - (a == b ? 1.0 / 3.0 : 0.0) - Q.matrix()[a][b];
                res2 += d * d;
            }
        st.residual = std::sqrt(res2);
        st.iterations = it;
        if (st.residual <= tol) {
            st.psi = dot(st.lambda, t) - m.log_z;
            for (int a = 0; a < 5; ++a)
                for (int b = 0; b < 5; ++b)
                    st.covariance(a, b) = m.second(a, b) - m.mean[a] * m.mean[b];
            return st;
        }

        Vec grad(5);
        for (int a = 0; a < 5; ++a) grad[a] = t[a] - m.mean[a];
        Mat cov(5, 5);
        for (int a = 0; a < 5; ++a)
            for (int b = 0; b < 5; ++b)
                cov(a, b) = m.second(a, b) - m.mean[a] * m.mean[b];
        Vec d = cov.solve(grad);

        double alpha = 1.0;
        const double slope = dot(grad, d);
        // Near the optimum the predicted gain falls below the float
        // resolution of the dual value; take the plain Newton step.
        if (slope <= 1e-13 * (1.0 + std::fabs(g_cur))) {
            axpy(1.0, d, st.lambda);
            g_cur = dual_value(st.lambda);
            continue;
        }
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            Vec trial = st.lambda;
            axpy(alpha, d, trial);
            double g_trial = dual_value(trial);
            if (g_trial >= g_cur + 1e-4 * alpha * slope) {
                st.lambda = trial;
                g_cur = g_trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted)
            throw DualDiverged("bm_dual_solve: line search stalled, residual " +
                               std::to_string(st.residual));
    }
    throw DualDiverged("bm_dual_solve: max iterations, residual " +
                       std::to_string(st.residual));
}

} // namespace

DualSolveResult bm_dual_solve(const QTensor& Q, const SphereRule& rule, double tol,
                              int max_iter) {
    DualState st = solve_dual(Q, rule, tol, max_iter);
    DualSolveResult out;
    out.lambda = coords_qtensor(st.lambda);
    out.psi = st.psi;
    out.iterations = st.iterations;
    out.moment_residual = st.residual;
    return out;
}

LdgPolynomial::LdgPolynomial(double a, double b, double c) : a_(a), b_(b), c_(c) {
    if (!(c > 0.0)) throw Error("ldg_polynomial: quartic coefficient must be positive");
}

namespace {

// tr(Q E_i) and tr(Q^2 E_i) for the coordinate basis.
void ldg_traces(const Mat3& Q, Vec& tq, Vec& tq2) {
    Mat3 Q2{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Q2[i][j] = 0.0;
            for (int k = 0; k < 3; ++k) Q2[i][j] += Q[i][k] * Q[k][j];
        }
    auto tr_e = [](const Mat3& A) {
        return Vec{A[0][0] - A[2][2], A[0][1] + A[1][0], A[1][1] - A[2][2],
                   A[0][2] + A[2][0], A[1][2] + A[2][1]};
    };
    tq = tr_e(Q);
    tq2 = tr_e(Q2);
}

} // namespace

double LdgPolynomial::value(const Vec& q) const {
    Mat3 Q = coords_qtensor(q).matrix();
    double s2 = 0.0, s3 = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            s2 += Q[i][j] * Q[j][i];
            for (int k = 0; k < 3; ++k) s3 += Q[i][j] * Q[j][k] * Q[k][i];
        }
    return 0.5 * a_ * s2 + b_ * s3 / 3.0 + 0.25 * c_ * s2 * s2;
}

Vec LdgPolynomial::gradient(const Vec& q) const {
    Mat3 Q = coords_qtensor(q).matrix();
    double s2 = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s2 += Q[i][j] * Q[j][i];
    Vec tq, tq2;
    ldg_traces(Q, tq, tq2);
    Vec g(5);
    for (int i = 0; i < 5; ++i) g[i] = a_ * tq[i] + b_ * tq2[i] + c_ * s2 * tq[i];
    return g;
}

Mat LdgPolynomial::hessian(const Vec& q) const {
    Mat3 Q = coords_qtensor(q).matrix();
    double s2 = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s2 += Q[i][j] * Q[j][i];
    Vec tq, tq2;
    ldg_traces(Q, tq, tq2);
    const Mat& G = qtensor_gram();

    // tr(Q (E_i E_j + E_j E_i)) for the cubic term.
    static const std::array<Mat3, 5> E = [] {
        std::array<Mat3, 5> e{};
        e[0][0][0] = 1;
        e[0][2][2] = -1;
        e[1][0][1] = e[1][1][0] = 1;
        e[2][1][1] = 1;
        e[2][2][2] = -1;
        e[3][0][2] = e[3][2][0] = 1;
        e[4][1][2] = e[4][2][1] = 1;
        return e;
    }();

    Mat H(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            double tqee = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    for (int c = 0; c < 3; ++c)
                        tqee += Q[a][b] * (E[i][b][c] * E[j][c][a] + E[j][b][c] * E[i][c][a]);
            H(i, j) = a_ * G(i, j) + b_ * tqee +
                      c_ * (2.0 * tq[i] * tq[j] + s2 * G(i, j));
        }
    return H;
}

std::shared_ptr<LdgPolynomial> ldg_polynomial(double a, double b, double c) {
    return std::make_shared<LdgPolynomial>(a, b, c);
}

BallMajumdarPotential::BallMajumdarPotential(SphereRule rule, double kappa, double T,
                                             double solve_tol, int max_iter)
    : rule_(std::move(rule)), kappa_(kappa), T_(T), solve_tol_(solve_tol),
      max_iter_(max_iter) {
    if (!(T > 0.0)) throw Error("bm_potential: temperature must be positive");
}

double BallMajumdarPotential::psi(const Vec& q) const {
    return solve_dual(coords_qtensor(q), rule_, solve_tol_, max_iter_).psi;
}

double BallMajumdarPotential::value(const Vec& q) const {
    const QTensor Q = coords_qtensor(q);
    if (eigen_margin(Q) <= 0.0) return kInf;
    DualState st = solve_dual(Q, rule_, solve_tol_, max_iter_);
    const double fro = Q.frobenius();
    return T_ * st.psi - kappa_ * fro * fro;
}

Vec BallMajumdarPotential::gradient(const Vec& q) const {
    const QTensor Q = coords_qtensor(q);
    DualState st = solve_dual(Q, rule_, solve_tol_, max_iter_);
    const Mat& G = qtensor_gram();
    Vec g = G.apply(st.lambda); // tr(Lambda E_i)
    Vec gq = G.apply(q);
    for (int i = 0; i < 5; ++i) g[i] = T_ * g[i] - 2.0 * kappa_ * gq[i];
    return g;
}

Mat BallMajumdarPotential::hessian(const Vec& q) const {
    const QTensor Q = coords_qtensor(q);
    DualState st = solve_dual(Q, rule_, solve_tol_, max_iter_);
    const Mat& G = qtensor_gram();
    // d2 psi/dq^2 = G Cov^{-1} G from differentiating the stationarity system.
    Mat H(5, 5);
    for (int j = 0; j < 5; ++j) {
        Vec col(5);
        for (int i = 0; i < 5; ++i) col[i] = G(i, j);
        Vec x = st.covariance.solve(col);
        Vec gx = G.apply(x);
        for (int i = 0; i < 5; ++i) H(i, j) = T_ * gx[i] - 2.0 * kappa_ * G(i, j);
    }
    // Symmetrize against roundoff.
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j) {
            double v = 0.5 * (H(i, j) + H(j, i));
            H(i, j) = H(j, i) = v;
        }
    return H;
}

double BallMajumdarPotential::margin(const Vec& q) const {
    return eigen_margin(coords_qtensor(q));
}

std::shared_ptr<BallMajumdarPotential> bm_potential(SphereRule rule, double kappa,
                                                    double T) {
    return std::make_shared<BallMajumdarPotential>(std::move(rule), kappa, T);
}

} // namespace singvar
