#pragma once

#include "medax/configuration.hpp"
#include "medax/rng.hpp"

#include <vector>

namespace medax::testing {

inline Vec v2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

inline Vec v3(double x, double y, double z) {
    Vec v(3);
    v << x, y, z;
    return v;
}

inline Mat random_rotation(int n, SplitMix64& rng) {
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Mat> qr(g);
    Mat q = qr.householderQ();
    if (q.determinant() < 0) q.col(0) *= -1.0;
    return q;
}

/// Random k-direction configuration in R^n, rejection-sampled away from the
/// genericity threshold so perturbation-style tests have margin.
inline Configuration random_configuration(SplitMix64& rng, int n, int k,
                                          double margin_tol = 1e-3) {
    for (;;) {
        std::vector<Vec> dirs;
        dirs.reserve(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) dirs.push_back(rng.unit_vector(n));
        if (!is_generic(dirs, margin_tol)) continue;
        return Configuration::from_directions(std::move(dirs));
    }
}

/// Equilateral three-direction configuration in R^2.
inline Configuration equilateral() {
    std::vector<Vec> dirs;
    for (int j = 0; j < 3; ++j) {
        const double th = 2.0 * M_PI * j / 3.0;
        dirs.push_back(v2(std::cos(th), std::sin(th)));
    }
    return Configuration::from_directions(std::move(dirs));
}

/// Dense angular grid oracle for the separation constant of planar
/// configurations: minimizes the cosine spread over `grid_size` angles
/// (grid includes angle 0) and halves the result.
inline double grid_separation_oracle(const Configuration& a, int grid_size = 1000000) {
    double best = std::numeric_limits<double>::infinity();
    for (int g = 0; g < grid_size; ++g) {
        const double th = 2.0 * M_PI * g / grid_size;
        const Vec u = v2(std::cos(th), std::sin(th));
        double hi = -std::numeric_limits<double>::infinity();
        double lo = std::numeric_limits<double>::infinity();
        for (int i = 0; i < a.k(); ++i) {
            const double d = u.dot(a.dir(i));
            hi = std::max(hi, d);
            lo = std::min(lo, d);
        }
        best = std::min(best, hi - lo);
    }
    return 0.5 * best;
}

}  // namespace medax::testing
