#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace medax {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Relative singular-value threshold used by all rank decisions.
inline constexpr double kDefaultSigmaTol = 1e-6;

/// Angle at vertex y of the triangle (x, y, z), in [0, pi].
/// The cosine is clamped into [-1, 1] before acos to absorb roundoff.
inline double angle_at(const Vec& x, const Vec& y, const Vec& z) {
    const Vec u = x - y;
    const Vec v = z - y;
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) {
        throw std::invalid_argument("angle_at: undefined angle, vertex coincides with an endpoint");
    }
    const double c = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
    return std::acos(c);
}

/// Dimension of the affine hull of `points`: rank of the centered
/// coordinate matrix, counting singular values above
/// sigma_tol * (largest singular value, or 1 if all vanish).
inline int affine_rank(const std::vector<Vec>& points, double sigma_tol = kDefaultSigmaTol) {
    if (points.empty()) {
        throw std::invalid_argument("affine_rank: empty point list");
    }
    if (sigma_tol <= 0.0) {
        throw std::invalid_argument("affine_rank: sigma_tol must be positive");
    }
    const int m = static_cast<int>(points.size());
    const int n = static_cast<int>(points.front().size());
    if (m == 1) return 0;
    Vec centroid = Vec::Zero(n);
    for (const Vec& p : points) {
        if (p.size() != n) throw std::invalid_argument("affine_rank: mixed point dimensions");
        centroid += p;
    }
    centroid /= static_cast<double>(m);
    Mat rows(m, n);
    for (int i = 0; i < m; ++i) rows.row(i) = (points[i] - centroid).transpose();
    Eigen::JacobiSVD<Mat> svd(rows);
    const auto& sv = svd.singularValues();
    const double top = sv.size() > 0 ? sv[0] : 0.0;
    const double threshold = sigma_tol * (top > 0.0 ? top : 1.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv[i] > threshold) ++rank;
    }
    return rank;
}

/// k points are in generic position when they span a (k-1)-dimensional
/// affine plane, i.e. are not contained in any (k-2)-plane.
inline bool is_generic(const std::vector<Vec>& points, double sigma_tol = kDefaultSigmaTol) {
    const int k = static_cast<int>(points.size());
    if (k < 1) throw std::invalid_argument("is_generic: need at least one point");
    return affine_rank(points, sigma_tol) == k - 1;
}

/// A finite set of unit directions on S^{n-1}.
struct DirectionSet {
    std::vector<Vec> dirs;
    double unit_tol = 1e-9;

    void validate() const {
        for (const Vec& d : dirs) {
            if (std::abs(d.norm() - 1.0) > unit_tol) {
                throw std::invalid_argument("DirectionSet: direction is not unit length");
            }
        }
    }

    int size() const { return static_cast<int>(dirs.size()); }
};

/// Lexicographic comparison of coordinate vectors, the tie-break order used
/// for every deterministic subset choice.
inline bool lex_less(const Vec& a, const Vec& b) {
    for (int i = 0; i < a.size() && i < b.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return a.size() < b.size();
}

}  // namespace medax
