#pragma once

#include "qpeer/distributions.hpp"
#include "qpeer/inversion.hpp"
#include "qpeer/peering.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace qpeer {

// Service laws of the three-CDN reference workload: the primary and peer 1 share one
// Bounded Pareto, peer 2 has a lighter tail.
struct ReferenceLaws {
    BoundedPareto primary_law{1.5, 1010.15, 1e10};
    BoundedPareto peer2_law{2.0, 1500.23, 1e10};
    HyperExp primary;
    HyperExp peer2;
};

ReferenceLaws reference_laws(const FitOptions& fit = {});

// Primary at `primary_load`, peer 1 at 0.5, peer 2 at 0.4, PLB weights (0.4, 0.6),
// WLB top share 0.8, threshold 0.5, deadline 20000.
PeeringScenario reference_scenario(const ReferenceLaws& laws, double primary_load,
                                   PolicyKind policy, const InversionParams& inversion = {});

inline constexpr PolicyKind kAllPolicies[] = {PolicyKind::ULB, PolicyKind::MLB, PolicyKind::PLB,
                                              PolicyKind::WLB};

// t = 0, then four points per decade over [1e2, 1e8], with the 20000 deadline inserted.
std::vector<double> cdf_time_grid();

struct ReproduceOptions {
    InversionParams inversion;
    FitOptions fit;
    PolicyKind peering_cdf_policy = PolicyKind::ULB;
    double error_sweep_load = 0.7;
    std::optional<int> significant_digits;
};

const std::vector<std::string>& reproduce_targets();

// Writes the CSV for `target`; DomainError for an unknown name.
void reproduce(const std::string& target, std::ostream& out, const ReproduceOptions& opts = {});

} // namespace qpeer
