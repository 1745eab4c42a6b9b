#include "qpeer/error.hpp"
#include "qpeer/mg1.hpp"
#include "qpeer/peering.hpp"
#include "qpeer/priority.hpp"
#include "qpeer/simulate.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

using namespace qpeer;

namespace {

SimConfig config(std::uint64_t seed, std::uint64_t arrivals)
{
    SimConfig cfg;
    cfg.seed = seed;
    cfg.arrivals = arrivals;
    return cfg;
}

bool inside(const WaitStats& w, double target)
{
    return std::abs(w.mean_wait - target) <= w.ci_half_width;
}

struct TraceRow {
    double arrival, wait, service, departure;
    std::string cls, node;
};

std::vector<TraceRow> parse_trace(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    CHECK(line == "arrival_time,class,node,wait,service,departure");
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        std::istringstream f(line);
        std::string cell[6];
        for (auto& c : cell)
            std::getline(f, c, ',');
        rows.push_back({std::stod(cell[0]), std::stod(cell[3]), std::stod(cell[4]),
                        std::stod(cell[5]), cell[1], cell[2]});
    }
    return rows;
}

PriorityModel two_class()
{
    return PriorityModel({PriorityClass{0.25, HyperExp::exponential(1.0), 1},
                          PriorityClass{0.25, HyperExp::exponential(1.0), 2}});
}

PeeringScenario light_scenario(double primary_rate, PolicyKind kind)
{
    const HyperExp h({{0.6, 2.0}, {0.4, 0.5}});
    return PeeringScenario{
        CdnNode{"primary", primary_rate, h, 1.0, NodeRole::Primary},
        {CdnNode{"peer1", 0.3, h}, CdnNode{"peer2", 0.25, HyperExp::exponential(1.2)}},
        RedirectionPolicy{kind, {0.4, 0.6}, 0.8},
        0.5,
        20000.0,
        0.95,
        ReductionBaseline::SameLoad,
        InversionParams{}};
}

} // namespace

TEST_CASE("config validation")
{
    SimConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.batches = 9;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = SimConfig{};
    cfg.warmup_fraction = 0.5;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = SimConfig{};
    cfg.cdf_grid = {2.0, 1.0};
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    CHECK_THROWS_AS(run_mg1(Mg1Model(1.0, HyperExp::exponential(1.0)), SimConfig{}), InstabilityError);
}

TEST_CASE("identical seeds give identical results")
{
    const Mg1Model m(0.5, HyperExp::exponential(1.0));
    SimConfig cfg = config(7, 50'000);
    cfg.cdf_grid = {0.5, 1.0, 4.0};
    const SimResult a = run_mg1(m, cfg);
    const SimResult b = run_mg1(m, cfg);
    CHECK(a.overall.mean_wait == b.overall.mean_wait);
    CHECK(a.overall.ci_half_width == b.overall.ci_half_width);
    CHECK(a.overall.cdf == b.overall.cdf);
    CHECK(a.nodes[0].utilization == b.nodes[0].utilization);
    cfg.seed = 8;
    CHECK(run_mg1(m, cfg).overall.mean_wait != a.overall.mean_wait);
}

TEST_CASE("M/M/1 mean wait, utilization and arrivals")
{
    const Mg1Model m(0.5, HyperExp::exponential(1.0));
    SimConfig cfg = config(1, 1'000'000);
    cfg.cdf_grid = {0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
    const SimResult r = run_mg1(m, cfg);
    CHECK(r.overall.ci_half_width > 0.0);
    CHECK(inside(r.overall, 1.0));
    CHECK(std::abs(r.nodes[0].utilization - 0.5) <= 3.0 * r.nodes[0].utilization_se);
    CHECK(std::abs(r.interarrival_mean - 2.0) <= 3.0 * r.interarrival_se);
    CHECK(r.overall.count == 900'000);
    for (std::size_t i = 0; i < r.cdf_grid.size(); ++i) {
        if (i > 0)
            CHECK(r.overall.cdf[i] >= r.overall.cdf[i - 1]);
        CHECK(r.overall.cdf[i] == doctest::Approx(m.wait_cdf(r.cdf_grid[i])).epsilon(0.01));
    }
}

TEST_CASE("trace satisfies the Lindley recurrence")
{
    std::ostringstream trace;
    SimConfig cfg = config(3, 20'000);
    cfg.trace = &trace;
    run_mg1(Mg1Model(0.8, HyperExp({{0.5, 3.0}, {0.5, 0.6}})), cfg);
    const auto rows = parse_trace(trace.str());
    REQUIRE(rows.size() > 19'000);
    CHECK(rows.front().wait == 0.0);
    for (std::size_t n = 0; n + 1 < rows.size(); ++n) {
        const auto& a = rows[n];
        const auto& b = rows[n + 1];
        CHECK(b.arrival >= a.arrival);
        const double lindley = std::max(0.0, a.wait + a.service - (b.arrival - a.arrival));
        CHECK(std::abs(b.wait - lindley) <= 1e-9 * std::max(1.0, b.arrival));
        CHECK(a.departure == doctest::Approx(a.arrival + a.wait + a.service));
    }
}

TEST_CASE("CI coverage across seeds")
{
    const Mg1Model m(0.5, HyperExp::exponential(1.0));
    int covered = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
        covered += inside(run_mg1(m, config(seed, 200'000)).overall, 1.0) ? 1 : 0;
    CHECK(covered >= 44);
}

TEST_CASE("Bounded Pareto sampling path")
{
    const BoundedPareto bp(1.8, 1.0, 100.0);
    const double lambda = 0.5 / bp.moment(1);
    const SimResult r = run_mg1(lambda, bp, config(5, 500'000));
    const double pk = lambda * bp.moment(2) / (2.0 * (1.0 - 0.5));
    CHECK(std::abs(r.overall.mean_wait - pk) <= 2.0 * r.overall.ci_half_width);
    CHECK(std::abs(r.nodes[0].utilization - 0.5) <= 3.0 * r.nodes[0].utilization_se);
}

TEST_CASE("two-class priority")
{
    const PriorityModel m = two_class();
    const SimResult r = run_priority(m, config(11, 1'000'000));
    const WaitStats& hi = r.find("class 2");
    const WaitStats& lo = r.find("class 1");
    CHECK(inside(hi, m.expected_wait_class(2)));
    CHECK(inside(lo, m.expected_wait_class(1)));
    CHECK(m.expected_wait_class(2) == doctest::Approx(2.0 / 3.0));
    CHECK(m.expected_wait_class(1) == doctest::Approx(4.0 / 3.0));
    CHECK_THROWS_AS(r.find("class 3"), DomainError);
}

TEST_CASE("high class never waits longer on average")
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const SimResult r = run_priority(two_class(), config(seed, 50'000));
        CHECK(r.find("class 2").mean_wait <= r.find("class 1").mean_wait);
    }
}

TEST_CASE("priority runs are non-preemptive and FCFS within a class")
{
    std::ostringstream trace;
    SimConfig cfg = config(2, 20'000);
    cfg.trace = &trace;
    run_priority(two_class(), cfg);
    auto rows = parse_trace(trace.str());
    // Records are written at service start; starts must not overlap a running service.
    double busy_until = 0.0;
    double last_arrival[2] = {-1.0, -1.0};
    for (const auto& r : rows) {
        const double start = r.arrival + r.wait;
        CHECK(start >= busy_until - 1e-9 * std::max(1.0, start));
        busy_until = r.departure;
        const int c = r.cls == "class 2" ? 0 : 1;
        CHECK(r.arrival >= last_arrival[c]);
        last_arrival[c] = r.arrival;
    }
}

TEST_CASE("single-class priority equals run_mg1")
{
    const HyperExp h({{0.3, 0.5}, {0.7, 2.0}});
    const SimConfig cfg = config(4, 100'000);
    const SimResult a = run_mg1(Mg1Model(0.6, h), cfg);
    const SimResult b = run_priority(PriorityModel({PriorityClass{0.6, h, 1}}), cfg);
    CHECK(a.overall.mean_wait == b.overall.mean_wait);
    CHECK(a.overall.ci_half_width == b.overall.ci_half_width);
}

TEST_CASE("top class wait distribution")
{
    const PriorityModel m({PriorityClass{0.35, HyperExp::exponential(1.0), 1},
                           PriorityClass{0.35, HyperExp::exponential(1.0), 2}});
    SimConfig cfg = config(9, 1'000'000);
    for (double t = 0.25; t <= 8.0; t *= 1.5)
        cfg.cdf_grid.push_back(t);
    const SimResult r = run_priority(m, cfg);
    double ks = 0.0;
    for (std::size_t i = 0; i < cfg.cdf_grid.size(); ++i)
        ks = std::max(ks, std::abs(r.find("class 2").cdf[i] - m.top_class_wait_cdf(cfg.cdf_grid[i])));
    CHECK(ks <= 0.02);
}

TEST_CASE("light-tailed single queue agrees with P-K")
{
    const HyperExp h({{0.6, 2.0}, {0.4, 0.5}});
    for (double rho : {0.3, 0.5, 0.7}) {
        const Mg1Model m = Mg1Model::at_load(rho, h);
        const SimResult r = run_mg1(m, config(SimConfig{}.seed, 1'000'000));
        CHECK_MESSAGE(inside(r.overall, m.expected_wait()), "rho " << rho);
    }
}

TEST_CASE("peering below threshold redirects nothing")
{
    const PeeringScenario sc = light_scenario(0.2, PolicyKind::ULB);
    const SimResult r = run_peering(sc, config(6, 100'000));
    CHECK(r.find("peer1/redirected").count == 0);
    CHECK(r.find("peer2/redirected").count == 0);
    CHECK(r.dropped == 0);
}

TEST_CASE("MLB uses exactly one peer")
{
    const PeeringScenario sc = light_scenario(0.8, PolicyKind::MLB);
    const PeeringOutcome o = evaluate(sc);
    const SimResult r = run_peering(sc, config(6, 100'000));
    const auto n1 = r.find("peer1/redirected").count;
    const auto n2 = r.find("peer2/redirected").count;
    CHECK(((n1 == 0) != (n2 == 0)));
    CHECK((o.per_peer_share[0].share == 0.0) == (n1 == 0));
}

TEST_CASE("light-tailed peering agrees with the analytic model")
{
    for (auto k : {PolicyKind::ULB, PolicyKind::MLB, PolicyKind::PLB, PolicyKind::WLB}) {
        const PeeringScenario sc = light_scenario(0.8, k);
        const PeeringOutcome o = evaluate(sc);
        const SimResult r = run_peering(sc, config(13, 1'000'000));
        CHECK_MESSAGE(inside(r.overall, o.weighted_wait), to_string(k));
        CHECK(inside(r.find("primary"), o.primary_wait));
    }
}

TEST_CASE("drops are counted")
{
    PeeringScenario sc = light_scenario(0.8, PolicyKind::ULB);
    sc.peers[0].acceptance_threshold = 0.2;
    sc.peers[1].acceptance_threshold = 0.2;
    const PeeringOutcome o = evaluate(sc);
    const SimConfig cfg = config(14, 200'000);
    const SimResult r = run_peering(sc, cfg);
    const double expected = o.dropped_fraction * static_cast<double>(cfg.arrivals);
    CHECK(o.dropped_fraction > 0.0);
    CHECK(std::abs(static_cast<double>(r.dropped) - expected) <= 5.0 * std::sqrt(expected));
}
