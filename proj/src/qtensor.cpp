#include "singvar/qtensor.hpp"

#include <algorithm>
#include <cmath>

#include "singvar/errors.hpp"

namespace singvar {

double QTensor::frobenius() const {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += (*this)(i, j) * (*this)(i, j);
    return std::sqrt(s);
}

QTensor from_components(const std::array<double, 5>& q) {
    return QTensor::from_components(q);
}

std::array<double, 5> to_components(const QTensor& Q) { return Q.to_components(); }

EigenTriple eigenvalues(const QTensor& Q) {
    // Traceless symmetric: char poly is lambda^3 - J2 lambda - J3 = 0 with
    // J2 = tr(Q^2)/2, J3 = det(Q).
    const double fro = Q.frobenius();
    if (fro < 1e-14) return {0.0, 0.0, 0.0};

    const double j2 = 0.5 * fro * fro;
    Mat3 m = Q.matrix();
    const double j3 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                      m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                      m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);

    const double s = std::sqrt(j2 / 3.0);
    double arg = j3 / (2.0 * s * s * s);
    arg = std::clamp(arg, -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;

    EigenTriple lam;
    for (int k = 0; k < 3; ++k)
        lam[k] = 2.0 * s * std::cos(theta - 2.0 * M_PI * k / 3.0);
    std::sort(lam.begin(), lam.end(), std::greater<double>());
    return lam;
}

double eigen_margin(const QTensor& Q) {
    EigenTriple lam = eigenvalues(Q);
    return std::min(lam[2] + 1.0 / 3.0, 2.0 / 3.0 - lam[0]);
}

BodyMembership membership(const QTensor& Q, double boundary_tol) {
    const double margin = eigen_margin(Q);
    BodyStatus st = BodyStatus::Boundary;
    if (margin > boundary_tol)
        st = BodyStatus::Interior;
    else if (margin < -boundary_tol)
        st = BodyStatus::Exterior;
    return {st, margin};
}

QTensor uniaxial(double s, const Vec3& n) {
    const double nn = n[0] * n[0] + n[1] * n[1] + n[2] * n[2];
    if (std::fabs(std::sqrt(nn) - 1.0) > 1e-12)
        throw InvalidDirection("uniaxial: direction must be a unit vector");
    std::array<double, 5> q;
    q[0] = s * (n[0] * n[0] - 1.0 / 3.0);
    q[1] = s * n[1] * n[0];
    q[2] = s * (n[1] * n[1] - 1.0 / 3.0);
    q[3] = s * n[2] * n[0];
    q[4] = s * n[2] * n[1];
    return QTensor::from_components(q);
}

QTensor rotate(const QTensor& Q, const Mat3& R) {
    Mat3 m = Q.matrix();
    Mat3 rm{}; // R * Q
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            rm[i][j] = 0.0;
            for (int k = 0; k < 3; ++k) rm[i][j] += R[i][k] * m[k][j];
        }
    Mat3 out{}; // (R Q) * R^T
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            out[i][j] = 0.0;
            for (int k = 0; k < 3; ++k) out[i][j] += rm[i][k] * R[j][k];
        }
    // Symmetrize against roundoff before repacking.
    std::array<double, 5> q;
    q[0] = out[0][0];
    q[1] = 0.5 * (out[1][0] + out[0][1]);
    q[2] = out[1][1];
    q[3] = 0.5 * (out[2][0] + out[0][2]);
    q[4] = 0.5 * (out[2][1] + out[1][2]);
    return QTensor::from_components(q);
}

} // namespace singvar
