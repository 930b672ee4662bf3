#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pgope {

/// Dense real vector; gradient estimates use the policy's flattening order.
using Vec = std::vector<double>;

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

inline void axpy(Vec& y, double a, const Vec& x) {
    assert(y.size() == x.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline void scale(Vec& v, double a) {
    for (double& x : v) x *= a;
}

inline double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vec scaled(const Vec& v, double a) {
    Vec r = v;
    scale(r, a);
    return r;
}

inline double max_abs(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Square matrix, row-major. Covariance matrices of gradient estimates are d x d.
struct Mat {
    int n = 0;
    std::vector<double> a;

    Mat() = default;
    explicit Mat(int n_) : n(n_), a(static_cast<std::size_t>(n_) * n_, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

    void add_outer(const Vec& u, const Vec& v, double w) {
        assert(static_cast<int>(u.size()) == n && static_cast<int>(v.size()) == n);
        for (int i = 0; i < n; ++i) {
            const double wu = w * u[i];
            if (wu == 0.0) continue;
            double* row = &a[static_cast<std::size_t>(i) * n];
            for (int j = 0; j < n; ++j) row[j] += wu * v[j];
        }
    }

    Mat& operator+=(const Mat& o) {
        assert(n == o.n);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += o.a[i];
        return *this;
    }

    Mat& operator*=(double s) {
        for (double& x : a) x *= s;
        return *this;
    }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < n; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius() const {
        double s = 0.0;
        for (double x : a) s += x * x;
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : a) m = std::max(m, std::abs(x));
        return m;
    }

    double asymmetry() const {
        double m = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) m = std::max(m, std::abs((*this)(i, j) - (*this)(j, i)));
        return m;
    }
};

inline Mat operator-(const Mat& a, const Mat& b) {
    assert(a.n == b.n);
    Mat r = a;
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] -= b.a[i];
    return r;
}

/// Covariance of a finite distribution of vectors: E[v v^T] - E[v] E[v]^T.
/// Weights need not sum to one; they are normalized internally.
inline Mat weighted_covariance(const std::vector<double>& weights, const std::vector<Vec>& points) {
    if (weights.size() != points.size() || points.empty())
        throw std::invalid_argument("weighted_covariance: mismatched or empty input");
    const int d = static_cast<int>(points.front().size());
    double total = 0.0;
    for (double w : weights) total += w;
    Vec mean = zeros(d);
    Mat second(d);
    for (std::size_t k = 0; k < points.size(); ++k) {
        const double w = weights[k] / total;
        axpy(mean, w, points[k]);
        second.add_outer(points[k], points[k], w);
    }
    second.add_outer(mean, mean, -1.0);
    return second;
}

/// Smallest eigenvalue of a symmetric matrix via cyclic Jacobi sweeps.
inline double min_eigenvalue(Mat m) {
    const int n = m.n;
    if (n == 0) return 0.0;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
        if (off < 1e-28) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = m(k, p), akq = m(k, q);
                    m(k, p) = c * akp - s * akq;
                    m(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = m(p, k), aqk = m(q, k);
                    m(p, k) = c * apk - s * aqk;
                    m(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    double mn = m(0, 0);
    for (int i = 1; i < n; ++i) mn = std::min(mn, m(i, i));
    return mn;
}

}  // namespace pgope
