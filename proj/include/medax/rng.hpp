#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>

namespace medax {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Deterministic 64-bit generator (splitmix64). Used everywhere a seed
/// appears so that identical seeds give identical streams on every
/// platform; the standard <random> distributions are implementation
/// defined and would break byte-reproducible outputs.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Standard normal via Box-Muller (pinned, unlike std::normal_distribution).
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    Vec gaussian_vector(int dim) {
        Vec v(dim);
        for (int i = 0; i < dim; ++i) v[i] = normal();
        return v;
    }

    /// Uniform direction on the unit sphere of R^dim.
    Vec unit_vector(int dim) {
        Vec v = gaussian_vector(dim);
        double n = v.norm();
        while (n < 1e-12) {
            v = gaussian_vector(dim);
            n = v.norm();
        }
        return v / n;
    }

    Vec point_in_box(const Vec& lo, const Vec& hi) {
        Vec v(lo.size());
        for (int i = 0; i < lo.size(); ++i) v[i] = uniform(lo[i], hi[i]);
        return v;
    }

private:
    std::uint64_t state_;
};

}  // namespace medax
