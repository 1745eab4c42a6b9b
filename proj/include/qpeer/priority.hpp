#pragma once

#include "qpeer/distributions.hpp"
#include "qpeer/inversion.hpp"

#include <complex>
#include <span>
#include <vector>

namespace qpeer {

// One request stream of a non-preemptive head-of-the-line queue.
// Larger priority_index means higher priority.
struct PriorityClass {
    double arrival_rate;
    HyperExp service;
    int priority_index;

    double load() const noexcept { return arrival_rate * service.mean(); }
};

struct FixedPointOptions {
    int max_iterations = 500;
    double tolerance = 1e-12;
    // Initial relaxation factor; halved whenever an iterate moves away from the fixed point.
    double damping = 1.0;
};

// Multi-class M/G/1 with non-preemptive HOL priority.
class PriorityModel {
public:
    // Indices must be a permutation of 1..P; total load must be below one.
    explicit PriorityModel(std::vector<PriorityClass> classes);

    // Classes ordered by ascending priority_index.
    std::span<const PriorityClass> classes() const noexcept { return classes_; }
    std::size_t size() const noexcept { return classes_.size(); }
    int top_index() const noexcept { return static_cast<int>(classes_.size()); }
    const PriorityClass& at(int priority_index) const;

    double load() const noexcept;

    // Mean residual work found in service: sum over all classes of lambda_i E[X_i^2] / 2.
    double w0() const noexcept;

    // Cobham: W_p = W0 / ((1 - sigma_p)(1 - sigma_{p+1})), sigma_p = sum_{i >= p} rho_i.
    double expected_wait_class(int priority_index) const;

    // Waiting-time transform of the highest class, with the lower classes contributing only
    // through the job they may have in service.
    std::complex<double> top_class_wait_transform(std::complex<double> s) const;
    double top_class_wait_cdf(double t, const InversionParams& params = {}) const;

    // Delay-cycle transform for a class below the top: the higher classes are merged into one
    // stream whose busy-period transform stretches the frequency argument.
    std::complex<double> lower_class_wait_transform(int priority_index, std::complex<double> s,
                                                    const FixedPointOptions& fp = {}) const;

    // Any class: top class through the closed form, others through the delay-cycle form.
    double class_wait_cdf(int priority_index, double t, const InversionParams& params = {},
                          const FixedPointOptions& fp = {}) const;

private:
    std::complex<double> wait_transform(int priority_index, std::complex<double> s,
                                        const FixedPointOptions& fp) const;

    std::vector<PriorityClass> classes_;
};

// Kendall's functional equation G(s) = B(s + lambda - lambda G(s)) for the M/G/1 busy period
// started by one job of `cls`, solved by relaxed fixed-point iteration from G = B(s).
// Throws ConvergenceError when the iteration cap is reached.
std::complex<double> busy_period_transform(const PriorityClass& cls, std::complex<double> s,
                                           const FixedPointOptions& fp = {});

// Single stream equivalent to the union of `classes` (rates add, service laws mix).
PriorityClass merge_classes(std::span<const PriorityClass> classes, int priority_index);

} // namespace qpeer
