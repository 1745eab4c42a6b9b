#pragma once

#include "qpeer/distributions.hpp"
#include "qpeer/mg1.hpp"
#include "qpeer/peering.hpp"
#include "qpeer/priority.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace qpeer {

struct SimConfig {
    std::uint64_t seed = 1;
    // Horizon in counted arrivals: every arrival for single-node runs, primary arrivals for
    // peering runs. Other streams stop at the time of the last counted arrival.
    std::uint64_t arrivals = 1'000'000;
    // Requests arriving up to and including the counted arrival at this fraction of the horizon are
    // excluded from statistics.
    double warmup_fraction = 0.1;
    int batches = 30;
    std::vector<double> cdf_grid;
    // When set, one CSV record per served request:
    // arrival_time,class,node,wait,service,departure
    std::ostream* trace = nullptr;

    void validate() const;
};

struct WaitStats {
    std::string label;
    std::uint64_t count = 0;  // post-warmup observations
    double mean_wait = 0.0;
    double ci_half_width = 0.0;  // 95% batch means; NaN when too few observations
    std::vector<double> cdf;     // empirical Pr[W <= t] on SimResult::cdf_grid
};

struct NodeStats {
    std::string id;
    double utilization = 0.0;
    double utilization_se = 0.0;  // standard error over time batches
};

struct SimResult {
    std::vector<double> cdf_grid;
    // One entry per (node, class): "wait" for M/G/1, "class <p>" for priority runs,
    // "<node>/native" and "<node>/redirected" (plus "primary") for peering runs.
    std::vector<WaitStats> classes;
    // Requests from counted streams that were served anywhere: for peering runs the
    // served-request weighted wait of primary-origin users.
    WaitStats overall;
    std::vector<NodeStats> nodes;
    std::uint64_t dropped = 0;
    double interarrival_mean = 0.0;  // counted streams, post-warmup
    double interarrival_se = 0.0;

    const WaitStats& find(const std::string& label) const;
};

SimResult run_mg1(const Mg1Model& model, const SimConfig& cfg);
// Samples the Bounded Pareto directly instead of a fitted mixture.
SimResult run_mg1(double arrival_rate, const BoundedPareto& service, const SimConfig& cfg);
SimResult run_priority(const PriorityModel& model, const SimConfig& cfg);
// Routes each primary arrival with the analytic split of evaluate(); redirected requests
// join the chosen peer's top class.
SimResult run_peering(const PeeringScenario& scenario, const SimConfig& cfg);

} // namespace qpeer
