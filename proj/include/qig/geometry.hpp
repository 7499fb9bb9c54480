#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>

namespace qig {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Spatial point in the closed unit square (the canonical domain).
// Fields and integrands defined on the square are extended to all of
// R^2 by nearest-point projection, so out-of-range points are legal.
struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline Point clamp_to_domain(Point p) {
    return {std::clamp(p.x, 0.0, 1.0), std::clamp(p.y, 0.0, 1.0)};
}

inline double dist(Point a, Point b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// Euclidean ball B_r(c) in the plane. |B_r| = pi r^2.
struct Ball {
    Point center;
    double radius = 0.0;
    double measure() const { return M_PI * radius * radius; }
    bool contains(Point p) const { return dist(p, center) <= radius; }
};

inline Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

// Largest singular value; for symmetric PSD matrices this is the top
// eigenvalue. 2x2 gets a closed form, larger sizes go through Eigen.
inline double operator_norm(const Mat& m) {
    if (m.rows() == 2 && m.cols() == 2) {
        const double a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
        const double s = a * a + b * b + c * c + d * d;
        const double det = a * d - b * c;
        const double disc = std::sqrt(std::max(0.0, s * s - 4.0 * det * det));
        return std::sqrt(std::max(0.0, 0.5 * (s + disc)));
    }
    return m.jacobiSvd().singularValues()(0);
}

// Extremes of the quadratic form e -> (M e, e) over unit e; only the
// symmetric part contributes.
inline std::array<double, 2> quadform_range(const Mat& m) {
    Mat s = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(s);
    const auto& ev = es.eigenvalues();
    return {ev(0), ev(ev.size() - 1)};
}

}  // namespace qig
