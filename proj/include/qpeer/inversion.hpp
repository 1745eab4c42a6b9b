#pragma once

#include <complex>
#include <functional>
#include <optional>

namespace qpeer {

using LaplaceFn = std::function<std::complex<double>(std::complex<double>)>;

// Euler-accelerated Bromwich inversion (Abate-Whitt). The contour abscissa is set from
// precision_target, the series is summed to `terms` and then binomially averaged over
// `euler_depth` further partial sums.
struct InversionParams {
    int terms = 33;
    int euler_depth = 12;
    double precision_target = 1e-8;

    // Throws DomainError unless terms >= euler_depth >= 1 and precision_target > 0.
    void validate() const;
};

// Density w(t) from its transform. t must be positive.
double invert_density(const LaplaceFn& transform, double t, const InversionParams& params = {});

// CDF at t from the transform of a probability law (value 1 at s = 0), obtained by inverting
// transform(s)/s and clamping to [0, 1]. At t = 0 the result is `atom` when given, otherwise
// the limit from above, transform(s -> infinity).
double invert_cdf(const LaplaceFn& transform, double t, const InversionParams& params = {},
                  std::optional<double> atom = std::nullopt);

} // namespace qpeer
