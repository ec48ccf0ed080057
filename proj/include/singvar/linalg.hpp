#pragma once

// Small dense vectors/matrices. Everything here is tiny (k <= 5, k*n <= 15),
// so a plain row-major matrix with partial-pivot LU is all we need.

#include <cmath>
#include <cstddef>
#include <vector>

#include "singvar/errors.hpp"

namespace singvar {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vec scaled(const Vec& x, double alpha) {
    Vec y(x);
    for (double& v : y) v *= alpha;
    return y;
}

inline Vec vsub(const Vec& a, const Vec& b) {
    Vec c(a);
    for (std::size_t i = 0; i < a.size(); ++i) c[i] -= b[i];
    return c;
}

inline Vec vadd(const Vec& a, const Vec& b) {
    Vec c(a);
    for (std::size_t i = 0; i < a.size(); ++i) c[i] += b[i];
    return c;
}

class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols, 0.0) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Vec apply(const Vec& x) const {
        Vec y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) y[i] += (*this)(i, j) * x[j];
        return y;
    }

    Mat& operator+=(const Mat& o) {
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }

    Mat& operator*=(double s) {
        for (double& v : a_) v *= s;
        return *this;
    }

    double frobenius() const {
        double s = 0.0;
        for (double v : a_) s += v * v;
        return std::sqrt(s);
    }

    // Solves A x = b by partial-pivot LU. A must be square.
    Vec solve(Vec b) const {
        const std::size_t n = rows_;
        Mat lu(*this);
        std::vector<std::size_t> piv(n);
        for (std::size_t i = 0; i < n; ++i) piv[i] = i;
        for (std::size_t c = 0; c < n; ++c) {
            std::size_t p = c;
            for (std::size_t r = c + 1; r < n; ++r)
                if (std::fabs(lu(r, c)) > std::fabs(lu(p, c))) p = r;
            if (std::fabs(lu(p, c)) < 1e-300) throw SingularMatrix();
            if (p != c) {
                for (std::size_t j = 0; j < n; ++j) std::swap(lu(p, j), lu(c, j));
                std::swap(b[p], b[c]);
            }
            for (std::size_t r = c + 1; r < n; ++r) {
                double m = lu(r, c) / lu(c, c);
                lu(r, c) = m;
                for (std::size_t j = c + 1; j < n; ++j) lu(r, j) -= m * lu(c, j);
                b[r] -= m * b[c];
            }
        }
        Vec x(n);
        for (std::size_t i = n; i-- > 0;) {
            double s = b[i];
            for (std::size_t j = i + 1; j < n; ++j) s -= lu(i, j) * x[j];
            x[i] = s / lu(i, i);
        }
        return x;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

inline Mat outer(const Vec& a, const Vec& b) {
    Mat m(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
    return m;
}

} // namespace singvar
