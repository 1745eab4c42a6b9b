#include "qpeer/inversion.hpp"

#include "qpeer/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace qpeer {

namespace {

// Binomial Euler average of partial sums s[first .. first+depth].
double euler_average(const std::vector<double>& partial, int first, int depth)
{
    double acc = 0.0;
    double coeff = std::ldexp(1.0, -depth);  // C(depth, 0) / 2^depth
    for (int k = 0; k <= depth; ++k) {
        acc += coeff * partial[static_cast<std::size_t>(first + k)];
        coeff *= static_cast<double>(depth - k) / static_cast<double>(k + 1);
    }
    return acc;
}

double euler_invert(const LaplaceFn& transform, double t, const InversionParams& params)
{
    params.validate();
    if (!(t > 0.0) || !std::isfinite(t))
        throw DomainError("laplace inversion needs t > 0");
    const double a = -std::log(params.precision_target);
    const double u = std::exp(a / 2.0) / t;
    const double x = a / (2.0 * t);
    const double h = std::numbers::pi / t;
    const int last = params.terms + params.euler_depth + 1;

    std::vector<double> partial(static_cast<std::size_t>(last + 1));
    double sum = 0.5 * transform({x, 0.0}).real();
    partial[0] = u * sum;
    double sign = -1.0;
    for (int k = 1; k <= last; ++k) {
        sum += sign * transform({x, k * h}).real();
        partial[static_cast<std::size_t>(k)] = u * sum;
        sign = -sign;
    }
    const double est = euler_average(partial, params.terms, params.euler_depth);
    const double alt = euler_average(partial, params.terms + 1, params.euler_depth);
    if (!std::isfinite(est) || !std::isfinite(alt))
        throw InversionError("laplace inversion produced a non-finite value", t, est, alt);
    // Loose guard: only a series that has clearly not settled is rejected.
    const double scale = std::abs(partial[0]) + std::abs(est);
    if (std::abs(est - alt) > 1e-3 * scale + 1e3 * params.precision_target * std::abs(u))
        throw InversionError("accelerated series did not settle", t, est, alt);
    return est;
}

} // namespace

void InversionParams::validate() const
{
    if (!(euler_depth >= 1 && terms >= euler_depth))
        throw DomainError("inversion params: need terms >= euler_depth >= 1");
    if (!(precision_target > 0.0 && precision_target < 1.0))
        throw DomainError("inversion params: precision_target must lie in (0, 1)");
}

double invert_density(const LaplaceFn& transform, double t, const InversionParams& params)
{
    return euler_invert(transform, t, params);
}

double invert_cdf(const LaplaceFn& transform, double t, const InversionParams& params,
                  std::optional<double> atom)
{
    if (t < 0.0 || std::isnan(t))
        throw DomainError("cdf inversion needs t >= 0");
    double v;
    if (t == 0.0) {
        params.validate();
        v = atom ? *atom : transform({1e300, 0.0}).real();
    } else {
        v = euler_invert([&](std::complex<double> s) { return transform(s) / s; }, t, params);
    }
    return std::clamp(v, 0.0, 1.0);
}

} // namespace qpeer
