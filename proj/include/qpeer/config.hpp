#pragma once

#include "qpeer/auction.hpp"
#include "qpeer/distributions.hpp"
#include "qpeer/inversion.hpp"
#include "qpeer/mg1.hpp"
#include "qpeer/peering.hpp"
#include "qpeer/priority.hpp"
#include "qpeer/simulate.hpp"

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace qpeer {

// Scenario files are line-oriented:
//
//   # comment
//   [section name]
//   key_with_units = value
//
// Sections: [simulation], [inversion], [fit], [peering], [auction], [node <id>],
// [class <name>], [bid <bidder>]. Every error names the line and the field.

struct ServiceConfig {
    std::optional<BoundedPareto> bounded_pareto;  // fitted on use
    std::optional<HyperExp> hyperexp;
};

struct NodeConfig {
    std::string id;
    int line = 0;
    NodeRole role = NodeRole::Peer;
    ServiceConfig service;
    std::optional<double> load;
    std::optional<double> arrival_rate;
    double acceptance_threshold = 1.0;
};

struct ClassConfig {
    std::string name;
    int line = 0;
    int priority_index = 0;
    ServiceConfig service;
    std::optional<double> load;
    std::optional<double> arrival_rate;
};

struct PeeringConfig {
    RedirectionPolicy policy;
    double threshold_load = 0.5;
    double sla_deadline = 20000.0;
    double peer_load_cap = 0.95;
    ReductionBaseline baseline = ReductionBaseline::SameLoad;
    std::vector<double> error_sweep;
};

struct BidConfig {
    std::string bidder;
    int line = 0;
    std::optional<double> amount;
    double incurred_cost = 0.0;
    double expected_revenue = 0.0;
    double interest = 0.0;
    double valid_until = 0.0;
};

struct AuctionConfig {
    double managing_cost = 0.0;
    double expected_profit = 0.0;
    double evaluation_time = 0.0;
    std::optional<AuctionPolicy> policy;
    std::vector<BidConfig> bids;
};

struct ScenarioConfig {
    std::vector<NodeConfig> nodes;
    std::vector<ClassConfig> classes;
    PeeringConfig peering;
    AuctionConfig auction;
    SimConfig simulation;
    InversionParams inversion;
    FitOptions fit;
    std::vector<double> t_grid;

    // Builders fit Bounded Pareto laws on demand and throw ConfigError on missing pieces.
    Mg1Model mg1() const;
    PriorityModel priority() const;
    PeeringScenario peering_scenario() const;
    AuctionRound auction_round() const;
};

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::string& path);

HyperExp resolve_service(const ServiceConfig& service, const FitOptions& fit);

} // namespace qpeer
