#pragma once

#include "medax/configuration.hpp"

#include <algorithm>
#include <stdexcept>

namespace medax {

/// Parameter bundle (a, d, c, eps, delta, t, r) for one local chart of the
/// k-medial axis: points whose distance is delta-close to d and whose
/// direction set contains a generic subset eps-close to a. The schedule is
/// chosen so that within radius t of a chart point the rest of the chart
/// avoids the translated cone P_r.
struct Certificate {
    Configuration a;
    double d = 0.0;
    double c = 0.0;
    double eps = 0.0;
    double delta = 0.0;
    double t = 0.0;
    double r = 0.0;

    void validate() const {
        if (c <= 0.0) throw std::invalid_argument("Certificate: c must be positive");
        if (r >= 0.5 || r <= 0.0) throw std::invalid_argument("Certificate: need 0 < r < 1/2");
        if (d <= 0.0) throw std::invalid_argument("Certificate: d must be positive");
        const double slack = 1.0 + 1e-12;
        if (eps > slack * c / 4.0) throw std::invalid_argument("Certificate: eps exceeds c/4");
        if (delta > slack * std::min(d / 2.0, c * d / 8.0)) {
            throw std::invalid_argument("Certificate: delta exceeds min(d/2, c*d/8)");
        }
        if (t > slack * c * d / 16.0) throw std::invalid_argument("Certificate: t exceeds c*d/16");
    }
};

/// Concrete parameter schedule:
///   c = separation constant, eps = c/4, delta = min(d/2, c*d/8),
///   t = c*d/16, r = 1/4.
/// These satisfy the two bounds the cone-avoidance argument needs:
/// perturbing two directions by eps degrades the cosine spread by at most
/// 2*eps <= c/2, and c*d(x)*||v|| - 4*||v||^2 >= (c*d/2)*||v|| whenever
/// ||v|| <= t and d(x) >= d - delta.
inline Certificate make_certificate(const Configuration& a, double d,
                                    double sigma_tol = kDefaultSigmaTol) {
    if (d <= 0.0) throw std::invalid_argument("make_certificate: d must be positive");
    Certificate cert;
    cert.a = a;
    cert.d = d;
    cert.c = separation_constant(a, sigma_tol);
    cert.eps = cert.c / 4.0;
    cert.delta = std::min(d / 2.0, cert.c * d / 8.0);
    cert.t = cert.c * d / 16.0;
    cert.r = 0.25;
    cert.validate();
    return cert;
}

}  // namespace medax
