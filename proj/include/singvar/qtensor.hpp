#pragma once

// Symmetric traceless 3x3 order parameter tensors, the eigenvalue-constraint
// body K = { -1/3 <= lambda_i <= 2/3 }, and the 5-component coordinates
// q = (Q11, Q21, Q22, Q31, Q32) with Q33 = -Q11 - Q22.

#include <array>
#include <cstddef>

#include "singvar/linalg.hpp"

namespace singvar {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

class QTensor {
public:
    QTensor() : q_{0, 0, 0, 0, 0} {}

    static QTensor from_components(const std::array<double, 5>& q) {
        QTensor t;
        t.q_ = q;
        return t;
    }

    std::array<double, 5> to_components() const { return q_; }

    // Entry Q(i,j); symmetry and zero trace hold by construction.
    double operator()(int i, int j) const {
        static constexpr int idx[3][3] = {{0, 1, 3}, {1, 2, 4}, {3, 4, -1}};
        int m = idx[i][j];
        if (m < 0) return -q_[0] - q_[2];
        return q_[m];
    }

    Mat3 matrix() const {
        Mat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m[i][j] = (*this)(i, j);
        return m;
    }

    double frobenius() const;

    QTensor& operator+=(const QTensor& o) {
        for (int i = 0; i < 5; ++i) q_[i] += o.q_[i];
        return *this;
    }

    QTensor& operator*=(double s) {
        for (double& v : q_) v *= s;
        return *this;
    }

private:
    std::array<double, 5> q_; // Q11, Q21, Q22, Q31, Q32
};

// Eigenvalues sorted descending; entries sum to zero.
using EigenTriple = std::array<double, 3>;

enum class BodyStatus { Interior, Boundary, Exterior };

struct BodyMembership {
    BodyStatus status;
    double margin; // min(lambda_min + 1/3, 2/3 - lambda_max), positive inside
};

constexpr double kDefaultBoundaryTol = 1e-12;

QTensor from_components(const std::array<double, 5>& q);
std::array<double, 5> to_components(const QTensor& Q);

// Closed-form (trigonometric) eigenvalues of a traceless symmetric 3x3 matrix.
EigenTriple eigenvalues(const QTensor& Q);

double eigen_margin(const QTensor& Q);
BodyMembership membership(const QTensor& Q, double boundary_tol = kDefaultBoundaryTol);

// s (n (x) n - I/3); throws InvalidDirection unless |n| = 1 within 1e-12.
QTensor uniaxial(double s, const Vec3& n);

// R Q R^T for a 3x3 rotation matrix R.
QTensor rotate(const QTensor& Q, const Mat3& R);

} // namespace singvar
