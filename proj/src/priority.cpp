#include "qpeer/priority.hpp"

#include "qpeer/error.hpp"

#include <algorithm>
#include <cmath>

namespace qpeer {

namespace {

// Solves D = (s + lambda D) K(s + lambda D) for D = 1 - G(s), where K(x) = (1 - B(x)) / x.
// Working with D keeps full relative precision as s -> 0.
std::complex<double> busy_period_complement(const PriorityClass& cls, std::complex<double> s,
                                            const FixedPointOptions& fp)
{
    const double lambda = cls.arrival_rate;
    auto map = [&](std::complex<double> d) {
        const std::complex<double> sigma = s + lambda * d;
        return sigma * cls.service.complement_over_s(sigma);
    };
    std::complex<double> d = s * cls.service.complement_over_s(s);
    if (lambda == 0.0)
        return d;
    double relax = std::clamp(fp.damping, 1e-6, 1.0);
    double prev_step = std::abs(map(d) - d);
    for (int it = 1; it <= fp.max_iterations; ++it) {
        const std::complex<double> target = map(d);
        const double step = std::abs(target - d);
        if (step > prev_step)
            relax = std::max(relax * 0.5, 1e-6);
        prev_step = step;
        const std::complex<double> next = d + relax * (target - d);
        if (std::abs(next - d) <= fp.tolerance * std::abs(next))
            return next;
        d = next;
        if (!std::isfinite(d.real()) || !std::isfinite(d.imag()))
            break;
    }
    throw ConvergenceError("busy-period fixed point did not converge", fp.max_iterations,
                           std::abs(map(d) - d));
}

} // namespace

PriorityModel::PriorityModel(std::vector<PriorityClass> classes) : classes_(std::move(classes))
{
    if (classes_.empty())
        throw DomainError("priority model: need at least one class");
    std::sort(classes_.begin(), classes_.end(),
              [](const PriorityClass& a, const PriorityClass& b) {
                  return a.priority_index < b.priority_index;
              });
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        if (classes_[i].priority_index != static_cast<int>(i) + 1)
            throw DomainError("priority model: indices must be a permutation of 1..P");
        if (!(classes_[i].arrival_rate >= 0.0) || !std::isfinite(classes_[i].arrival_rate))
            throw DomainError("priority model: arrival rates must be >= 0");
    }
    if (load() >= 1.0)
        throw InstabilityError("priority", load());
}

const PriorityClass& PriorityModel::at(int priority_index) const
{
    if (priority_index < 1 || priority_index > top_index())
        throw DomainError("priority model: no class with index " + std::to_string(priority_index));
    return classes_[static_cast<std::size_t>(priority_index - 1)];
}

double PriorityModel::load() const noexcept
{
    double rho = 0.0;
    for (const auto& c : classes_)
        rho += c.load();
    return rho;
}

double PriorityModel::w0() const noexcept
{
    double acc = 0.0;
    for (const auto& c : classes_)
        acc += c.arrival_rate * c.service.moment(2) / 2.0;
    return acc;
}

double PriorityModel::expected_wait_class(int priority_index) const
{
    at(priority_index);
    if (load() >= 1.0)
        throw InstabilityError("priority", load());
    double sigma_p = 0.0;
    double sigma_above = 0.0;
    for (const auto& c : classes_) {
        if (c.priority_index >= priority_index)
            sigma_p += c.load();
        if (c.priority_index > priority_index)
            sigma_above += c.load();
    }
    return w0() / ((1.0 - sigma_p) * (1.0 - sigma_above));
}

std::complex<double> PriorityModel::wait_transform(int priority_index, std::complex<double> s,
                                                   const FixedPointOptions& fp) const
{
    const PriorityClass& own = at(priority_index);
    std::complex<double> eta = s;
    if (priority_index < top_index()) {
        const auto higher = std::span<const PriorityClass>(classes_).subspan(
            static_cast<std::size_t>(priority_index));
        const PriorityClass merged = merge_classes(higher, top_index());
        if (merged.arrival_rate > 0.0)
            eta = s + merged.arrival_rate * busy_period_complement(merged, s, fp);
    }
    // numerator = eta [(1 - rho) + sum_{lower} lambda_i K_i(eta)]
    // denominator = s - lambda_p + lambda_p B_p(eta) = s - lambda_p eta K_p(eta)
    std::complex<double> lower = 1.0 - load();
    for (const auto& c : classes_) {
        if (c.priority_index < priority_index && c.arrival_rate > 0.0)
            lower += c.arrival_rate * c.service.complement_over_s(eta);
    }
    const std::complex<double> own_k = own.service.complement_over_s(eta);
    if (eta == s)
        return lower / (1.0 - own.arrival_rate * own_k);
    return eta * lower / (s - own.arrival_rate * eta * own_k);
}

std::complex<double> PriorityModel::top_class_wait_transform(std::complex<double> s) const
{
    return wait_transform(top_index(), s, FixedPointOptions{});
}

double PriorityModel::top_class_wait_cdf(double t, const InversionParams& params) const
{
    return invert_cdf([this](std::complex<double> s) { return top_class_wait_transform(s); }, t,
                      params, 1.0 - load());
}

std::complex<double> PriorityModel::lower_class_wait_transform(int priority_index,
                                                               std::complex<double> s,
                                                               const FixedPointOptions& fp) const
{
    at(priority_index);
    if (priority_index == top_index())
        throw DomainError("lower_class_wait_transform: class is the highest priority");
    return wait_transform(priority_index, s, fp);
}

double PriorityModel::class_wait_cdf(int priority_index, double t, const InversionParams& params,
                                     const FixedPointOptions& fp) const
{
    at(priority_index);
    return invert_cdf(
        [&](std::complex<double> s) { return wait_transform(priority_index, s, fp); }, t, params,
        1.0 - load());
}

std::complex<double> busy_period_transform(const PriorityClass& cls, std::complex<double> s,
                                           const FixedPointOptions& fp)
{
    if (cls.load() >= 1.0)
        throw InstabilityError("busy period", cls.load());
    return 1.0 - busy_period_complement(cls, s, fp);
}

PriorityClass merge_classes(std::span<const PriorityClass> classes, int priority_index)
{
    double total = 0.0;
    for (const auto& c : classes)
        total += c.arrival_rate;
    std::vector<Phase> phases;
    if (total > 0.0) {
        for (const auto& c : classes) {
            if (c.arrival_rate <= 0.0)
                continue;
            for (const auto& ph : c.service.phases())
                phases.push_back(Phase{ph.weight * c.arrival_rate / total, ph.rate});
        }
    } else {
        for (const auto& c : classes)
            for (const auto& ph : c.service.phases())
                phases.push_back(Phase{ph.weight, ph.rate});
    }
    if (phases.empty())
        throw DomainError("merge_classes: nothing to merge");
    return PriorityClass{total, HyperExp::normalized(std::move(phases)), priority_index};
}

} // namespace qpeer
