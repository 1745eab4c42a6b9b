#include "qpeer/mg1.hpp"

#include "qpeer/diagnostics.hpp"
#include "qpeer/error.hpp"

#include <cmath>

namespace qpeer {

namespace {

constexpr double kConditioningLoad = 0.999;

} // namespace

Mg1Model::Mg1Model(double arrival_rate, HyperExp service)
    : lambda_(arrival_rate), service_(std::move(service))
{
    if (!(arrival_rate > 0.0) || !std::isfinite(arrival_rate))
        throw DomainError("mg1: arrival rate must be positive");
    if (load() >= 1.0)
        throw InstabilityError("mg1", load());
}

Mg1Model::Mg1Model(double arrival_rate, const BoundedPareto& service, const FitOptions& fit)
    : Mg1Model(arrival_rate, fit_hyperexp(service, fit))
{
}

Mg1Model Mg1Model::at_load(double load, HyperExp service)
{
    const double mean = service.mean();
    return Mg1Model(load / mean, std::move(service));
}

double Mg1Model::expected_wait() const
{
    const double rho = load();
    if (rho >= 1.0)
        throw InstabilityError("mg1", rho);
    return lambda_ * service_.moment(2) / (2.0 * (1.0 - rho));
}

std::complex<double> Mg1Model::wait_transform(std::complex<double> s) const
{
    // s - lambda + lambda L(s) = s (1 - lambda (1 - L(s)) / s)
    return (1.0 - load()) / (1.0 - lambda_ * service_.complement_over_s(s));
}

double Mg1Model::wait_cdf(double t, const InversionParams& params) const
{
    const double rho = load();
    if (rho >= kConditioningLoad)
        warn("mg1 wait_cdf: load >= 0.999, inversion accuracy is degraded");
    return invert_cdf([this](std::complex<double> s) { return wait_transform(s); }, t, params,
                      1.0 - rho);
}

} // namespace qpeer
