#pragma once

// Independent reference values for the test suites.

#include "qpeer/distributions.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

// M/H_n/1 FCFS waiting time as a finite exponential sum. With service transform
// sum P_i r_i/(r_i + s), the waiting-time transform (1 - rho)/(1 - lambda K(s)),
// K(s) = sum P_i/(r_i + s), has n simple negative poles, one between each pair of
// consecutive -r_i and one in (-r_min, 0). Then Pr[W > t] = -sum_j c_j exp(z_j t).
class MhnWait {
public:
    MhnWait(double lambda, const qpeer::HyperExp& service) : lambda_(lambda), svc_(service)
    {
        std::vector<double> rates;
        for (const auto& ph : svc_.phases())
            rates.push_back(ph.rate);
        std::sort(rates.begin(), rates.end(), std::greater<>());
        rho_ = lambda * svc_.mean();
        auto g = [&](double s) { return lambda_ * k(s) - 1.0; };
        for (std::size_t i = 0; i < rates.size(); ++i) {
            double lo = -rates[i];
            const double hi_pole = i + 1 < rates.size() ? -rates[i + 1] : 0.0;
            double a = lo + 1e-13 * rates[i];
            double b = i + 1 < rates.size() ? hi_pole - 1e-13 * rates[i + 1] : 0.0;
            while (!(g(a) > 0.0))
                a = lo + (a - lo) * 1e-3;
            if (i + 1 < rates.size())
                while (!(g(b) < 0.0))
                    b = hi_pole - (hi_pole - b) * 1e-3;
            boost::uintmax_t iters = 500;
            const auto [x0, x1] = boost::math::tools::toms748_solve(
                g, a, b, boost::math::tools::eps_tolerance<double>(53), iters);
            const double z = 0.5 * (x0 + x1);
            double dk = 0.0;
            for (const auto& ph : svc_.phases())
                dk += ph.weight / ((ph.rate + z) * (ph.rate + z));
            poles_.push_back(z);
            coeffs_.push_back((1.0 - rho_) / (lambda_ * dk * z));
        }
    }

    double ccdf(double t) const
    {
        double acc = 0.0;
        for (std::size_t j = 0; j < poles_.size(); ++j)
            acc -= coeffs_[j] * std::exp(poles_[j] * t);
        return acc;
    }

    double cdf(double t) const { return 1.0 - ccdf(t); }

    double mean() const
    {
        double acc = 0.0;
        for (std::size_t j = 0; j < poles_.size(); ++j)
            acc += coeffs_[j] / poles_[j];
        return acc;
    }

private:
    double k(double s) const
    {
        double acc = 0.0;
        for (const auto& ph : svc_.phases())
            acc += ph.weight / (ph.rate + s);
        return acc;
    }

    double lambda_;
    qpeer::HyperExp svc_;
    double rho_ = 0.0;
    std::vector<double> poles_;
    std::vector<double> coeffs_;
};

} // namespace oracle
