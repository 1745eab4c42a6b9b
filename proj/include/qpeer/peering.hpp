#pragma once

#include "qpeer/distributions.hpp"
#include "qpeer/inversion.hpp"

#include <span>
#include <string>
#include <vector>

namespace qpeer {

enum class NodeRole { Primary, Peer };

struct CdnNode {
    std::string id;
    double arrival_rate;  // native requests per time unit
    HyperExp service;
    // Largest fraction of the redirected stream this node will take.
    double acceptance_threshold = 1.0;
    NodeRole role = NodeRole::Peer;

    double load() const noexcept { return arrival_rate * service.mean(); }
};

enum class PolicyKind { ULB, MLB, PLB, WLB };

struct RedirectionPolicy {
    PolicyKind kind = PolicyKind::ULB;
    std::vector<double> plb_weights;  // one per peer, PLB only
    double wlb_top_share = 0.8;       // WLB only

    void validate(std::size_t peer_count) const;
};

enum class ReductionBaseline {
    SameLoad,       // no-peering wait at the primary's actual load
    ThresholdLoad,  // no-peering wait at the threshold load
};

struct PeeringScenario {
    CdnNode primary;
    std::vector<CdnNode> peers;
    RedirectionPolicy policy;
    double threshold_load = 0.5;
    double sla_deadline = 20000.0;
    // No peer is pushed past this total load; the excess is dropped.
    double peer_load_cap = 0.95;
    ReductionBaseline baseline = ReductionBaseline::SameLoad;
    InversionParams inversion;

    void validate() const;
};

// Fractions of the redirected stream; share + dropped over all peers is 1.
struct PeerShare {
    std::string peer_id;
    double share = 0.0;
    double dropped = 0.0;
};

struct PeeringOutcome {
    double redirect_ratio = 0.0;  // fraction of the primary's load shed
    std::vector<PeerShare> per_peer_share;
    double new_primary_load = 0.0;
    std::vector<double> per_peer_new_load;
    double primary_wait = 0.0;
    std::vector<double> per_peer_redirected_wait;
    double weighted_wait = 0.0;    // over served requests of primary origin
    double no_peering_wait = 0.0;  // the reduction baseline
    double reduction_vs_no_peering = 0.0;  // percent
    double sla_probability = 0.0;
    double dropped_fraction = 0.0;  // of all primary-origin requests
};

// Redirected rates per peer. accepted[i] + dropped[i] summed over i equals redirected_rate.
struct RedirectionSplit {
    std::vector<double> accepted;
    std::vector<double> dropped;
};

// max(0, load - threshold) / load, or 0 at zero load.
double redirection_ratio(double load, double threshold);

// Applies the policy to `redirected_rate`, then caps each peer at its acceptance threshold
// and at `peer_load_cap` total load. MLB and WLB rank peers by `peer_waits`; ties go to the
// lowest id.
RedirectionSplit split_redirected(const RedirectionPolicy& policy, std::span<const CdnNode> peers,
                                  std::span<const double> peer_waits, double redirected_rate,
                                  double peer_load_cap = 0.95);

PeeringOutcome evaluate(const PeeringScenario& scenario);

// Pr[W <= sla_deadline] for primary users, alone or with the peers' help.
double sla_probability(const PeeringScenario& scenario, bool with_peering);

// Pr[W <= t] over served primary-origin requests, wherever they were served.
double peered_wait_cdf(const PeeringScenario& scenario, double t);

// lambda (1 + epsilon) E[X]; epsilon is signed.
double measured_load(double true_arrival, double mean_service, double epsilon);

// The dispatcher sheds based on the measured load; waits come from the true loads.
// Shedding is clamped to the whole primary stream, with a warning.
PeeringOutcome evaluate_with_error(const PeeringScenario& scenario, double epsilon);

const char* to_string(PolicyKind kind) noexcept;

} // namespace qpeer
