#pragma once

#include <complex>
#include <span>
#include <vector>

namespace qpeer {

// Bounded Pareto B(k, p, alpha): density alpha k^alpha x^(-alpha-1) / (1 - (k/p)^alpha)
// on [k, p]. Task sizes are in abstract time units of work.
class BoundedPareto {
public:
    // Throws DomainError unless 0 < alpha <= 2 and 0 < k < p.
    BoundedPareto(double alpha, double k, double p);

    double alpha() const noexcept { return alpha_; }
    double k() const noexcept { return k_; }
    double p() const noexcept { return p_; }

    double pdf(double x) const noexcept;
    double cdf(double x) const noexcept;
    double ccdf(double x) const noexcept;

    // E[X^j] for real j >= 0. Uses the logarithmic branch when |j - alpha| < 1e-9.
    double moment(double j) const;

    // Inverse-transform sample; u must lie in the open interval (0, 1).
    double sample(double u) const;

private:
    double alpha_;
    double k_;
    double p_;
    double norm_;  // 1 - (k/p)^alpha
};

struct Phase {
    double weight;
    double rate;
};

// Finite mixture of exponentials, h(t) = sum_i P_i lambda_i exp(-lambda_i t).
class HyperExp {
public:
    // Throws DomainError on empty phases, non-positive weights or rates, or when the
    // weights do not sum to one within 1e-12.
    explicit HyperExp(std::vector<Phase> phases);

    // Rescales positive weights to sum to one before validating.
    static HyperExp normalized(std::vector<Phase> phases);
    static HyperExp exponential(double rate);

    std::span<const Phase> phases() const noexcept { return phases_; }
    std::size_t size() const noexcept { return phases_.size(); }

    // Laplace-Stieltjes transform sum_i P_i lambda_i / (lambda_i + s).
    // Re(s) >= 0 is the supported domain; a pole hit throws DomainError.
    std::complex<double> transform(std::complex<double> s) const;

    // (1 - transform(s)) / s = sum_i P_i / (lambda_i + s), finite at s = 0 where it is E[X].
    // Queue transforms are written in terms of this to avoid cancellation near s = 0.
    std::complex<double> complement_over_s(std::complex<double> s) const;

    // E[X^j] = j! sum_i P_i / lambda_i^j; the model code only needs j = 1, 2.
    double moment(int j) const;
    double mean() const noexcept { return mean_; }

    double pdf(double t) const noexcept;
    double ccdf(double t) const noexcept;
    double cdf(double t) const noexcept { return 1.0 - ccdf(t); }

    // Two uniforms in (0, 1): the first picks the phase, the second the exponential.
    double sample(double u_phase, double u_exp) const;

private:
    std::vector<Phase> phases_;
    std::vector<double> cumulative_;
    double mean_ = 0.0;
};

struct FitOptions {
    int phases = 10;
    // Tail checkpoints are geometrically spaced over [lo_factor * k, hi_factor * p].
    double checkpoint_lo_factor = 10.0;
    double checkpoint_hi_factor = 0.1;
    int checkpoints = 25;
    double moment_tolerance = 1e-3;
    double tail_tolerance = 0.10;
};

struct FitQuality {
    double mean_rel_err = 0.0;
    double second_rel_err = 0.0;
    double tail_rel_err = 0.0;  // max over checkpoints of |G(x)/F(x) - 1|
};

// Measures a candidate mixture against the Bounded Pareto it approximates.
FitQuality fit_quality(const BoundedPareto& target, const HyperExp& fit,
                       const FitOptions& opts = {});

// Tail-matching hyper-exponential approximation with the first two moments pinned.
// Throws FitError (carrying the achieved residuals) when the contract cannot be met.
HyperExp fit_hyperexp(const BoundedPareto& target, const FitOptions& opts = {});

} // namespace qpeer
