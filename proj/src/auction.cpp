#include "qpeer/auction.hpp"

#include "qpeer/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>

namespace qpeer {

namespace {

constexpr double kEarthRadiusKm = 6371.0;

double great_circle_km(const Location& a, const Location& b)
{
    const double rad = std::numbers::pi / 180.0;
    const double dlat = (b.x - a.x) * rad;
    const double dlon = (b.y - a.y) * rad;
    const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(a.x * rad) * std::cos(b.x * rad) * std::sin(dlon / 2) *
                         std::sin(dlon / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

bool bid_less(const Bid& a, const Bid& b)
{
    return a.amount != b.amount ? a.amount < b.amount : a.bidder < b.bidder;
}

} // namespace

double exact_match(const std::string& a, const std::string& b) noexcept
{
    return a == b ? 1.0 : 0.0;
}

LocationSimilarity distance_decay(double scale, DistanceMetric metric)
{
    if (!(scale > 0.0))
        throw DomainError("distance_decay: scale must be positive");
    if (metric == DistanceMetric::GreatCircle)
        return [scale](const Location& a, const Location& b) {
            return std::exp(-great_circle_km(a, b) / scale);
        };
    return [scale](const Location& a, const Location& b) {
        return std::exp(-std::hypot(a.x - b.x, a.y - b.y) / scale);
    };
}

double payoff_value(double managing_cost, double expected_profit)
{
    if (!(managing_cost >= 0.0) || !(expected_profit >= 0.0))
        throw DomainError("payoff_value: cost and profit must be non-negative");
    return managing_cost + expected_profit;
}

double expected_revenue(std::span<const ContentRequest> trace, std::size_t k, std::size_t n,
                        double mix_weight, const ContentSimilarity& content,
                        const LocationSimilarity& location)
{
    if (k < 1 || k > trace.size() || k + n > trace.size())
        throw DomainError("expected_revenue: index out of range");
    if (!(mix_weight >= 0.0 && mix_weight <= 1.0))
        throw DomainError("expected_revenue: mix weight must lie in [0, 1]");
    const ContentRequest& rk = trace[k - 1];
    auto sim = [&](const ContentRequest& r) {
        return content(rk.content_key, r.content_key) * location(rk.location, r.location);
    };
    double ahead = 0.0;
    for (std::size_t j = k + 1; j <= k + n; ++j)
        ahead += sim(trace[j - 1]);
    double behind = 0.0;
    for (std::size_t i = 1; i < k; ++i)
        behind += sim(trace[i - 1]);
    return mix_weight * ahead + (1.0 - mix_weight) * behind;
}

double bidding_function(double incurred_cost, double expected_rev, double interest)
{
    if (!std::isfinite(incurred_cost) || !std::isfinite(expected_rev) || !std::isfinite(interest))
        throw DomainError("bidding_function: components must be finite");
    if (interest < 0.0)
        throw DomainError("bidding_function: interest must be non-negative");
    return incurred_cost + expected_rev + interest;
}

AuctionOutcome run_auction(const AuctionRound& round)
{
    if (!(round.payoff_cap >= 0.0))
        throw DomainError("run_auction: payoff cap must be non-negative");
    std::vector<Bid> valid;
    for (const auto& b : round.bids) {
        if (!(b.amount >= 0.0))
            throw DomainError("run_auction: bid amounts must be non-negative");
        if (b.amount <= round.payoff_cap && b.valid_until >= round.evaluation_time)
            valid.push_back(b);
    }
    AuctionOutcome out;
    if (valid.empty())
        return out;
    std::sort(valid.begin(), valid.end(), bid_less);
    out.failed = false;
    out.winners.push_back(valid.front().bidder);
    out.clearing_price = valid.size() >= 2 ? valid[1].amount : round.payoff_cap;
    return out;
}

std::string export_round(const AuctionRound& round, const AuctionOutcome& outcome)
{
    std::vector<Bid> sorted = round.bids;
    std::sort(sorted.begin(), sorted.end(), bid_less);
    std::map<std::string, std::string> alias;
    for (const auto& b : sorted)
        alias.emplace(b.bidder, "b" + std::to_string(alias.size() + 1));

    std::string out = "kind,bidder,amount,valid_until\n";
    char buf[128];
    std::snprintf(buf, sizeof buf, "cap,,%.17g,\n", round.payoff_cap);
    out += buf;
    for (const auto& b : sorted) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", b.amount, b.valid_until);
        out += "bid," + alias[b.bidder] + buf;
    }
    if (outcome.failed) {
        out += "outcome,FAILED,,\n";
    } else {
        std::snprintf(buf, sizeof buf, ",%.17g,\n", outcome.clearing_price);
        out += "outcome," + alias[outcome.winners.front()] + buf;
    }
    return out;
}

} // namespace qpeer
