#pragma once

#include "qpeer/distributions.hpp"
#include "qpeer/inversion.hpp"

#include <complex>

namespace qpeer {

// Single CDN as an M/G/1 FCFS queue: Poisson arrivals at `arrival_rate`, hyper-exponential
// service. Construction rejects load >= 1 with InstabilityError.
class Mg1Model {
public:
    Mg1Model(double arrival_rate, HyperExp service);
    // Fits the Bounded Pareto first; transforms are only ever taken through the mixture.
    Mg1Model(double arrival_rate, const BoundedPareto& service, const FitOptions& fit = {});

    static Mg1Model at_load(double load, HyperExp service);

    double arrival_rate() const noexcept { return lambda_; }
    const HyperExp& service() const noexcept { return service_; }

    double load() const noexcept { return lambda_ * service_.mean(); }

    // Pollaczek-Khinchine mean wait, lambda E[X^2] / (2 (1 - rho)).
    double expected_wait() const;

    // s (1 - rho) / (s - lambda + lambda L_h(s)), evaluated in a form that is exactly 1 at s = 0.
    std::complex<double> wait_transform(std::complex<double> s) const;

    // Pr[W <= t]. Equals 1 - rho at t = 0. Warns when rho >= 0.999.
    double wait_cdf(double t, const InversionParams& params = {}) const;

private:
    double lambda_;
    HyperExp service_;
};

} // namespace qpeer
