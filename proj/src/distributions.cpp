#include "qpeer/distributions.hpp"

#include "qpeer/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qpeer {

BoundedPareto::BoundedPareto(double alpha, double k, double p) : alpha_(alpha), k_(k), p_(p)
{
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw DomainError("bounded pareto: alpha must lie in (0, 2]");
    if (!(k > 0.0 && k < p) || !std::isfinite(p))
        throw DomainError("bounded pareto: need 0 < k < p");
    norm_ = -std::expm1(alpha_ * std::log(k_ / p_));
}

double BoundedPareto::pdf(double x) const noexcept
{
    if (x < k_ || x > p_)
        return 0.0;
    return alpha_ * std::pow(k_, alpha_) * std::pow(x, -alpha_ - 1.0) / norm_;
}

double BoundedPareto::ccdf(double x) const noexcept
{
    if (x <= k_)
        return 1.0;
    if (x >= p_)
        return 0.0;
    // ((k/x)^a - (k/p)^a) / (1 - (k/p)^a), written to keep precision as x -> p.
    const double kx = std::pow(k_ / x, alpha_);
    const double tail = -std::expm1(alpha_ * std::log(x / p_));
    return kx * tail / norm_;
}

double BoundedPareto::cdf(double x) const noexcept
{
    if (x <= k_)
        return 0.0;
    if (x >= p_)
        return 1.0;
    return -std::expm1(alpha_ * std::log(k_ / x)) / norm_;
}

double BoundedPareto::moment(double j) const
{
    if (j < 0.0)
        throw DomainError("bounded pareto: moment order must be >= 0");
    const double log_r = std::log(k_ / p_);
    const double delta = j - alpha_;
    if (std::abs(delta) < 1e-9)
        return alpha_ * std::pow(k_, alpha_) * std::log(p_ / k_) / norm_;
    // alpha p^j (r^a - r^j) / ((j - a)(1 - r^a)) with r = k/p, rearranged as
    // alpha k^j expm1(-(j - a) ln r) / ((j - a)(1 - r^a)) so that nothing cancels.
    const long double num = std::expm1(-static_cast<long double>(delta) * log_r);
    return static_cast<double>(static_cast<long double>(alpha_) * std::pow(k_, j) * num /
                               (static_cast<long double>(delta) * norm_));
}

double BoundedPareto::sample(double u) const
{
    if (!(u > 0.0 && u < 1.0))
        throw DomainError("bounded pareto: sample needs u in (0, 1)");
    return k_ * std::pow(1.0 - u * norm_, -1.0 / alpha_);
}

HyperExp::HyperExp(std::vector<Phase> phases) : phases_(std::move(phases))
{
    if (phases_.empty())
        throw DomainError("hyper-exponential: need at least one phase");
    double sum = 0.0;
    for (const auto& ph : phases_) {
        if (!(ph.weight > 0.0) || !(ph.rate > 0.0) || !std::isfinite(ph.rate))
            throw DomainError("hyper-exponential: weights and rates must be positive");
        sum += ph.weight;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw DomainError("hyper-exponential: weights must sum to 1");
    cumulative_.reserve(phases_.size());
    double acc = 0.0;
    for (const auto& ph : phases_) {
        acc += ph.weight;
        cumulative_.push_back(acc);
        mean_ += ph.weight / ph.rate;
    }
    cumulative_.back() = 1.0;
}

HyperExp HyperExp::normalized(std::vector<Phase> phases)
{
    const double sum = std::accumulate(phases.begin(), phases.end(), 0.0,
                                       [](double a, const Phase& ph) { return a + ph.weight; });
    if (!(sum > 0.0))
        throw DomainError("hyper-exponential: weights must be positive");
    // The rounding remainder goes to the heaviest phase so that no weight can vanish.
    const auto heaviest = static_cast<std::size_t>(
        std::max_element(phases.begin(), phases.end(),
                         [](const Phase& a, const Phase& b) { return a.weight < b.weight; }) -
        phases.begin());
    double assigned = 0.0;
    for (std::size_t i = 0; i < phases.size(); ++i) {
        phases[i].weight /= sum;
        if (i != heaviest)
            assigned += phases[i].weight;
    }
    phases[heaviest].weight = 1.0 - assigned;
    return HyperExp(std::move(phases));
}

HyperExp HyperExp::exponential(double rate)
{
    return HyperExp({Phase{1.0, rate}});
}

std::complex<double> HyperExp::transform(std::complex<double> s) const
{
    std::complex<double> acc = 0.0;
    for (const auto& ph : phases_) {
        const std::complex<double> den = ph.rate + s;
        if (den == 0.0)
            throw DomainError("hyper-exponential transform evaluated at a pole");
        acc += ph.weight * ph.rate / den;
    }
    return acc;
}

std::complex<double> HyperExp::complement_over_s(std::complex<double> s) const
{
    std::complex<double> acc = 0.0;
    for (const auto& ph : phases_) {
        const std::complex<double> den = ph.rate + s;
        if (den == 0.0)
            throw DomainError("hyper-exponential transform evaluated at a pole");
        acc += ph.weight / den;
    }
    return acc;
}

double HyperExp::moment(int j) const
{
    if (j < 0)
        throw DomainError("hyper-exponential: moment order must be >= 0");
    double fact = 1.0;
    for (int i = 2; i <= j; ++i)
        fact *= i;
    double acc = 0.0;
    for (const auto& ph : phases_)
        acc += ph.weight / std::pow(ph.rate, j);
    return fact * acc;
}

double HyperExp::pdf(double t) const noexcept
{
    if (t < 0.0)
        return 0.0;
    double acc = 0.0;
    for (const auto& ph : phases_)
        acc += ph.weight * ph.rate * std::exp(-ph.rate * t);
    return acc;
}

double HyperExp::ccdf(double t) const noexcept
{
    if (t <= 0.0)
        return 1.0;
    double acc = 0.0;
    for (const auto& ph : phases_)
        acc += ph.weight * std::exp(-ph.rate * t);
    return acc;
}

double HyperExp::sample(double u_phase, double u_exp) const
{
    if (!(u_phase > 0.0 && u_phase < 1.0) || !(u_exp > 0.0 && u_exp < 1.0))
        throw DomainError("hyper-exponential: sample needs uniforms in (0, 1)");
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u_phase);
    const std::size_t idx =
        std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                              phases_.size() - 1);
    return -std::log(u_exp) / phases_[idx].rate;
}

} // namespace qpeer
