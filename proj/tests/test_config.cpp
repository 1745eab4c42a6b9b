#include "qpeer/config.hpp"
#include "qpeer/error.hpp"
#include "qpeer/reproduce.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>
#include <string>

using namespace qpeer;

namespace {

ScenarioConfig parse(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

void expect_error(const std::string& text, int line, const std::string& field)
{
    try {
        parse(text);
        FAIL("expected ConfigError for: " << text);
    } catch (const ConfigError& e) {
        CHECK_MESSAGE(e.line() == line, std::string(e.what()));
        CHECK_MESSAGE(e.field() == field, std::string(e.what()));
        CHECK(std::string(e.what()).find(std::to_string(line)) != std::string::npos);
    }
}

std::string reproduce_csv(const std::string& target)
{
    std::ostringstream out;
    reproduce(target, out);
    return out.str();
}

} // namespace

TEST_CASE("reference scenario parses")
{
    const ScenarioConfig c = load_config(QPEER_CONFIG_DIR "/reference.ini");
    REQUIRE(c.nodes.size() == 3);
    CHECK(c.nodes[0].id == "primary");
    CHECK(c.nodes[0].role == NodeRole::Primary);
    CHECK(c.nodes[0].service.bounded_pareto->alpha() == 1.5);
    CHECK(c.nodes[2].service.bounded_pareto->k() == 1500.23);
    CHECK(*c.nodes[1].load == 0.5);
    CHECK(c.peering.policy.kind == PolicyKind::ULB);
    CHECK(c.peering.policy.plb_weights == std::vector<double>{0.4, 0.6});
    CHECK(c.simulation.seed == 7);
    CHECK(c.simulation.arrivals == 1'000'000);

    const PeeringScenario sc = c.peering_scenario();
    CHECK(sc.primary.load() == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(sc.peers.size() == 2);
    const PeeringScenario ref = reference_scenario(reference_laws(), 0.6, PolicyKind::ULB);
    CHECK(evaluate(sc).reduction_vs_no_peering ==
          doctest::Approx(evaluate(ref).reduction_vs_no_peering).epsilon(1e-12));
}

TEST_CASE("bundled configs build their models")
{
    const ScenarioConfig two = load_config(QPEER_CONFIG_DIR "/two_class.ini");
    const PriorityModel pm = two.priority();
    CHECK(pm.expected_wait_class(2) == doctest::Approx(2.0 / 3.0));
    const ScenarioConfig mm1 = load_config(QPEER_CONFIG_DIR "/mm1.ini");
    CHECK(mm1.mg1().expected_wait() == doctest::Approx(1.0));
    CHECK_FALSE(mm1.t_grid.empty());
    const ScenarioConfig auc = load_config(QPEER_CONFIG_DIR "/auction.ini");
    const AuctionRound r = auc.auction_round();
    CHECK(r.payoff_cap > 0.0);
    CHECK_FALSE(r.bids.empty());
}

TEST_CASE("overrides and optional sections")
{
    const ScenarioConfig c = parse("[inversion]\nterms = 40\neuler_depth = 10\n"
                                   "[node a]\ndistribution = hyperexp\nphases = 0.5:1, 0.5:2\n"
                                   "arrival_rate_per_time_unit = 0.3\n");
    CHECK(c.inversion.terms == 40);
    CHECK(c.inversion.euler_depth == 10);
    CHECK(c.mg1().service().size() == 2);
    CHECK(c.mg1().arrival_rate() == 0.3);
}

TEST_CASE("errors name the line and the field")
{
    expect_error("[simulation]\nseed = 1\nbogus = 2\n", 3, "bogus");
    expect_error("[simulation]\nseed = x\n", 2, "seed");
    expect_error("[simulation]\nseed = 1\nseed = 2\n", 3, "seed");
    expect_error("\n[simulation]\n[simulation]\n", 3, "simulation");
    expect_error("[nowhere]\n", 1, "nowhere");
    expect_error("seed = 1\n", 1, "seed");
    expect_error("[simulation]\njust text\n", 2, "");
    expect_error("[node a]\ndistribution = weibull\n", 2, "distribution");
    expect_error("[node a]\ndistribution = bounded_pareto\nalpha = 3\nk_time_units = 1\n"
                 "p_time_units = 10\n", 3, "alpha");
    expect_error("[peering]\npolicy = XLB\n", 2, "policy");
    expect_error("[simulation]\nwarmup_fraction = 0.7\n", 2, "warmup_fraction");
    expect_error("[simulation]\nseed = 1\nbatches = 5\n", 3, "batches");
    expect_error("[simulation]\nbatches = 30\nseed = -4\n", 3, "seed");
    expect_error("[output]\n\nt_grid_time_units = 3, 1\n", 3, "t_grid_time_units");
    expect_error("[node a]\ndistribution = bounded_pareto\nalpha = 1\nk_time_units = 10\n"
                 "p_time_units = 5\n", 5, "p_time_units");
}

TEST_CASE("builders report missing pieces")
{
    CHECK_THROWS_AS(parse("[simulation]\nseed = 1\n").mg1(), ConfigError);
    CHECK_THROWS_AS(parse("[node a]\ndistribution = exponential\nrate_per_time_unit = 1\nload = 0.5\n")
                        .peering_scenario(),
                    ConfigError);
    CHECK_THROWS_AS(parse("[node a]\ndistribution = exponential\nrate_per_time_unit = 1\n").mg1(),
                    ConfigError);
}

TEST_CASE("reproduce output is deterministic")
{
    for (const std::string t : {"fig15", "fig16", "table6"}) {
        const std::string a = reproduce_csv(t);
        CHECK(a == reproduce_csv(t));
        CHECK(a.back() == '\n');
        CHECK(a.find('\r') == std::string::npos);
    }
    const std::string table = reproduce_csv("table6");
    CHECK(table.rfind("load,ULB,MLB,PLB,WLB\n", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 4);
    CHECK_THROWS_AS(reproduce_csv("fig99"), DomainError);
}

TEST_CASE("reproduce shapes")
{
    std::istringstream fig15(reproduce_csv("fig15"));
    std::string line;
    std::getline(fig15, line);
    CHECK(line == "load,redirection_ratio");
    while (std::getline(fig15, line)) {
        const double load = std::stod(line.substr(0, line.find(',')));
        const double ratio = std::stod(line.substr(line.find(',') + 1));
        if (load <= 0.5 + 1e-12)
            CHECK(ratio == 0.0);
        else
            CHECK(ratio > 0.0);
    }
    std::istringstream fig10(reproduce_csv("fig10"));
    std::getline(fig10, line);
    CHECK(line == "t,rho_0.5");
    double prev = -1.0;
    while (std::getline(fig10, line)) {
        const double w = std::stod(line.substr(line.find(',') + 1));
        CHECK(w >= prev);
        prev = w;
    }
}
