#pragma once

#include "qpeer/vo.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qpeer {

using AuctionPolicy = ServiceRequirements;

// Planar coordinates, or (latitude, longitude) in degrees for great-circle distance.
struct Location {
    double x = 0.0;
    double y = 0.0;
};

struct ContentRequest {
    std::string content_key;
    Location location;
};

using ContentSimilarity = std::function<double(const std::string&, const std::string&)>;
using LocationSimilarity = std::function<double(const Location&, const Location&)>;

enum class DistanceMetric { Euclidean, GreatCircle };

double exact_match(const std::string& a, const std::string& b) noexcept;
// exp(-d / scale); great-circle distances are in kilometres.
LocationSimilarity distance_decay(double scale, DistanceMetric metric = DistanceMetric::Euclidean);

// Buyer's maximum: managing cost plus expected profit.
double payoff_value(double managing_cost, double expected_profit);

// Similarity of request k (1-based) to the next n requests, weighted by mix_weight, plus its
// similarity to the k-1 earlier ones, weighted by 1 - mix_weight.
double expected_revenue(std::span<const ContentRequest> trace, std::size_t k, std::size_t n,
                        double mix_weight, const ContentSimilarity& content = exact_match,
                        const LocationSimilarity& location = distance_decay(1.0));

double bidding_function(double incurred_cost, double expected_rev, double interest);

struct Bid {
    std::string bidder;
    double amount;
    double valid_until;
};

struct AuctionRound {
    double payoff_cap;
    AuctionPolicy policy;
    std::vector<Bid> bids;
    double evaluation_time = 0.0;  // bids expiring before this are ignored
};

struct AuctionOutcome {
    bool failed = true;  // no valid bid: renegotiate
    std::vector<std::string> winners;
    double clearing_price = 0.0;
};

// Reverse Vickrey: lowest valid bid wins (ties to the lowest id) and is paid the
// second-lowest valid bid, or the cap when it is the only valid bid.
AuctionOutcome run_auction(const AuctionRound& round);

// kind,bidder,amount,valid_until rows for the cap, each bid and the outcome. Bidders are
// relabelled b1, b2, ... in ascending (amount, id) order.
std::string export_round(const AuctionRound& round, const AuctionOutcome& outcome);

} // namespace qpeer
