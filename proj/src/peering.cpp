#include "qpeer/peering.hpp"

#include "qpeer/diagnostics.hpp"
#include "qpeer/error.hpp"
#include "qpeer/mg1.hpp"
#include "qpeer/priority.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qpeer {

namespace {

double pk_wait(double lambda, const HyperExp& service)
{
    if (lambda <= 0.0)
        return 0.0;
    return Mg1Model(lambda, service).expected_wait();
}

std::size_t argmin_wait(std::span<const CdnNode> peers, std::span<const double> waits)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < peers.size(); ++i) {
        if (waits[i] < waits[best] || (waits[i] == waits[best] && peers[i].id < peers[best].id))
            best = i;
    }
    return best;
}

std::vector<double> policy_fractions(const RedirectionPolicy& policy,
                                     std::span<const CdnNode> peers,
                                     std::span<const double> waits)
{
    const std::size_t n = peers.size();
    std::vector<double> f(n, 0.0);
    switch (policy.kind) {
    case PolicyKind::ULB:
        std::fill(f.begin(), f.end(), 1.0 / static_cast<double>(n));
        break;
    case PolicyKind::MLB:
        f[argmin_wait(peers, waits)] = 1.0;
        break;
    case PolicyKind::PLB:
        std::copy(policy.plb_weights.begin(), policy.plb_weights.end(), f.begin());
        break;
    case PolicyKind::WLB: {
        const std::size_t best = argmin_wait(peers, waits);
        if (n == 1) {
            f[best] = 1.0;
            break;
        }
        const double rest = (1.0 - policy.wlb_top_share) / static_cast<double>(n - 1);
        std::fill(f.begin(), f.end(), rest);
        f[best] = policy.wlb_top_share;
        break;
    }
    }
    return f;
}

std::vector<double> native_waits(std::span<const CdnNode> peers)
{
    std::vector<double> w;
    w.reserve(peers.size());
    for (const auto& p : peers)
        w.push_back(pk_wait(p.arrival_rate, p.service));
    return w;
}

// Where every primary-origin request goes once the dispatcher has settled on the shed load.
struct Plan {
    double redirected_rate = 0.0;
    double residual_rate = 0.0;
    RedirectionSplit split;
    std::vector<double> nominal;
};

Plan make_plan(const PeeringScenario& sc, double shed_load)
{
    Plan plan;
    const CdnNode& primary = sc.primary;
    plan.redirected_rate = shed_load / primary.service.mean();
    plan.residual_rate = std::max(0.0, primary.arrival_rate - plan.redirected_rate);
    const std::vector<double> waits = native_waits(sc.peers);
    plan.split = split_redirected(sc.policy, sc.peers, waits, plan.redirected_rate,
                                  sc.peer_load_cap);
    plan.nominal = policy_fractions(sc.policy, sc.peers, waits);
    return plan;
}

PriorityModel peer_model(const CdnNode& peer, double accepted)
{
    const double new_load = peer.load() + accepted * peer.service.mean();
    if (new_load >= 1.0)
        throw InstabilityError(peer.id, new_load);
    return PriorityModel(
        {PriorityClass{peer.arrival_rate, peer.service, 1}, PriorityClass{accepted, peer.service, 2}});
}

// Served-request mixture of the primary's residual queue and the peers' top classes.
double composite_cdf(const PeeringScenario& sc, const Plan& plan, double t)
{
    double served = plan.residual_rate;
    double acc = 0.0;
    if (plan.residual_rate > 0.0)
        acc += plan.residual_rate *
               Mg1Model(plan.residual_rate, sc.primary.service).wait_cdf(t, sc.inversion);
    for (std::size_t i = 0; i < sc.peers.size(); ++i) {
        const double a = plan.split.accepted[i];
        if (a <= 0.0)
            continue;
        served += a;
        acc += a * peer_model(sc.peers[i], a).top_class_wait_cdf(t, sc.inversion);
    }
    return served > 0.0 ? acc / served : 1.0;
}

PeeringOutcome evaluate_shed(const PeeringScenario& sc, double shed_load)
{
    const CdnNode& primary = sc.primary;
    const double rho = primary.load();
    const double mean = primary.service.mean();
    const double lambda = primary.arrival_rate;
    const Plan plan = make_plan(sc, shed_load);

    PeeringOutcome out;
    out.redirect_ratio = rho > 0.0 ? shed_load / rho : 0.0;
    out.new_primary_load = plan.residual_rate * mean;
    out.primary_wait = pk_wait(plan.residual_rate, primary.service);
    double served_rate = plan.residual_rate;
    double weighted = plan.residual_rate * out.primary_wait;
    double dropped_rate = 0.0;

    for (std::size_t i = 0; i < sc.peers.size(); ++i) {
        const CdnNode& peer = sc.peers[i];
        const double acc = plan.split.accepted[i];
        PeerShare share{peer.id, 0.0, 0.0};
        if (plan.redirected_rate > 0.0) {
            share.share = acc / plan.redirected_rate;
            share.dropped = plan.split.dropped[i] / plan.redirected_rate;
        } else {
            share.share = std::min(plan.nominal[i], peer.acceptance_threshold);
            share.dropped = plan.nominal[i] - share.share;
        }
        out.per_peer_share.push_back(share);
        dropped_rate += plan.split.dropped[i];
        out.per_peer_new_load.push_back(peer.load() + acc * peer.service.mean());
        const double w = peer_model(peer, acc).expected_wait_class(2);
        out.per_peer_redirected_wait.push_back(w);
        served_rate += acc;
        weighted += acc * w;
    }

    out.weighted_wait = plan.redirected_rate <= 0.0 ? out.primary_wait
                        : served_rate > 0.0         ? weighted / served_rate
                                                    : 0.0;
    out.sla_probability = composite_cdf(sc, plan, sc.sla_deadline);
    out.dropped_fraction = lambda > 0.0 ? dropped_rate / lambda : 0.0;

    const double baseline_rate = sc.baseline == ReductionBaseline::SameLoad
                                     ? lambda
                                     : std::min(lambda, sc.threshold_load / mean);
    out.no_peering_wait = pk_wait(baseline_rate, primary.service);
    out.reduction_vs_no_peering =
        out.no_peering_wait > 0.0 ? 100.0 * (1.0 - out.weighted_wait / out.no_peering_wait)
                                  : 0.0;
    return out;
}

} // namespace

void RedirectionPolicy::validate(std::size_t peer_count) const
{
    if (kind == PolicyKind::PLB) {
        if (plb_weights.size() != peer_count)
            throw DomainError("PLB policy: need one weight per peer");
        double sum = 0.0;
        for (double w : plb_weights) {
            if (!(w >= 0.0))
                throw DomainError("PLB policy: weights must be non-negative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw DomainError("PLB policy: weights must sum to 1");
    }
    if (kind == PolicyKind::WLB && !(wlb_top_share > 0.0 && wlb_top_share <= 1.0))
        throw DomainError("WLB policy: top share must lie in (0, 1]");
}

void PeeringScenario::validate() const
{
    if (peers.empty())
        throw DomainError("peering scenario: need at least one peer");
    if (!(threshold_load > 0.0 && threshold_load < 1.0))
        throw DomainError("peering scenario: threshold load must lie in (0, 1)");
    if (!(sla_deadline > 0.0))
        throw DomainError("peering scenario: SLA deadline must be positive");
    if (!(peer_load_cap > 0.0 && peer_load_cap < 1.0))
        throw DomainError("peering scenario: peer load cap must lie in (0, 1)");
    policy.validate(peers.size());
    auto check = [](const CdnNode& n) {
        if (!(n.arrival_rate >= 0.0) || !std::isfinite(n.arrival_rate))
            throw DomainError("node " + n.id + ": arrival rate must be >= 0");
        if (!(n.acceptance_threshold >= 0.0 && n.acceptance_threshold <= 1.0))
            throw DomainError("node " + n.id + ": acceptance threshold must lie in [0, 1]");
        if (n.load() >= 1.0)
            throw InstabilityError(n.id, n.load());
    };
    check(primary);
    for (const auto& p : peers)
        check(p);
}

double redirection_ratio(double load, double threshold)
{
    if (!(load >= 0.0 && load < 1.0))
        throw DomainError("redirection_ratio: load must lie in [0, 1)");
    if (load == 0.0)
        return 0.0;
    return std::max(0.0, load - threshold) / load;
}

RedirectionSplit split_redirected(const RedirectionPolicy& policy, std::span<const CdnNode> peers,
                                  std::span<const double> peer_waits, double redirected_rate,
                                  double peer_load_cap)
{
    if (peers.empty())
        throw DomainError("split_redirected: need at least one peer");
    if (peer_waits.size() != peers.size())
        throw DomainError("split_redirected: need one wait per peer");
    if (!(redirected_rate >= 0.0))
        throw DomainError("split_redirected: redirected rate must be >= 0");
    policy.validate(peers.size());

    const std::vector<double> f = policy_fractions(policy, peers, peer_waits);
    RedirectionSplit split;
    for (std::size_t i = 0; i < peers.size(); ++i) {
        const double offered = f[i] * redirected_rate;
        const double headroom =
            std::max(0.0, (peer_load_cap - peers[i].load()) / peers[i].service.mean());
        const double cap = std::min(peers[i].acceptance_threshold * redirected_rate, headroom);
        const double acc = std::min(offered, cap);
        split.accepted.push_back(acc);
        split.dropped.push_back(offered - acc);
    }
    return split;
}

PeeringOutcome evaluate(const PeeringScenario& scenario)
{
    scenario.validate();
    const double rho = scenario.primary.load();
    return evaluate_shed(scenario, std::max(0.0, rho - scenario.threshold_load));
}

double sla_probability(const PeeringScenario& scenario, bool with_peering)
{
    if (with_peering)
        return evaluate(scenario).sla_probability;
    scenario.validate();
    const CdnNode& p = scenario.primary;
    if (p.arrival_rate <= 0.0)
        return 1.0;
    return Mg1Model(p.arrival_rate, p.service).wait_cdf(scenario.sla_deadline, scenario.inversion);
}

double peered_wait_cdf(const PeeringScenario& scenario, double t)
{
    scenario.validate();
    const double shed = std::max(0.0, scenario.primary.load() - scenario.threshold_load);
    return composite_cdf(scenario, make_plan(scenario, shed), t);
}

double measured_load(double true_arrival, double mean_service, double epsilon)
{
    const double v = true_arrival * (1.0 + epsilon) * mean_service;
    if (!(v >= 0.0))
        throw DomainError("measured_load: measured load must be >= 0");
    return v;
}

PeeringOutcome evaluate_with_error(const PeeringScenario& scenario, double epsilon)
{
    scenario.validate();
    const CdnNode& p = scenario.primary;
    const double rho = p.load();
    const double measured = measured_load(p.arrival_rate, p.service.mean(), epsilon);
    double shed = std::max(0.0, measured - scenario.threshold_load);
    if (shed > rho) {
        warn("evaluate_with_error: measured load asks to shed more than the primary carries; "
             "clamped to full shed");
        shed = rho;
    }
    return evaluate_shed(scenario, shed);
}

const char* to_string(PolicyKind kind) noexcept
{
    switch (kind) {
    case PolicyKind::ULB: return "ULB";
    case PolicyKind::MLB: return "MLB";
    case PolicyKind::PLB: return "PLB";
    case PolicyKind::WLB: return "WLB";
    }
    return "?";
}

} // namespace qpeer
