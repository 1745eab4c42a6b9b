// qpeer command-line front end. Exit codes: 0 success, 1 usage or config error,
// 2 model error (instability, failed fit, inversion or fixed point, protocol violation).

#include "qpeer/auction.hpp"
#include "qpeer/config.hpp"
#include "qpeer/csv.hpp"
#include "qpeer/error.hpp"
#include "qpeer/mg1.hpp"
#include "qpeer/peering.hpp"
#include "qpeer/priority.hpp"
#include "qpeer/reproduce.hpp"
#include "qpeer/simulate.hpp"
#include "qpeer/vo.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace qpeer;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config;
    std::string mode = "analytic";
    std::string out;
    std::string trace;
    std::string events;
    std::string target;
    std::string policy = "ULB";
    int round = 0;
    bool cdf = false;
    bool long_term = false;
    double alpha = 1.5, k = 1010.15, p = 1e10;
    int phases = 10;
};

ScenarioConfig load(const Options& o)
{
    ScenarioConfig cfg = load_config(o.config);
    if (const char* env = std::getenv("QPEER_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            throw UsageError("QPEER_SEED must be a non-negative integer");
        cfg.simulation.seed = v;
    }
    return cfg;
}

std::optional<int> digits(const Options& o)
{
    return o.round > 0 ? std::optional<int>(o.round) : std::nullopt;
}

bool want_analytic(const Options& o) { return o.mode != "simulate"; }
bool want_sim(const Options& o) { return o.mode != "analytic"; }

std::string agreement(double analytic, const WaitStats& s)
{
    if (std::isnan(s.ci_half_width))
        return "no";
    return std::abs(analytic - s.mean_wait) <= s.ci_half_width ? "yes" : "no";
}

std::vector<double> t_grid(const ScenarioConfig& cfg)
{
    return cfg.t_grid.empty() ? cdf_time_grid() : cfg.t_grid;
}

void cmd_fit(const Options& o, std::ostream& out)
{
    FitOptions fo;
    fo.phases = o.phases;
    const BoundedPareto bp(o.alpha, o.k, o.p);
    const HyperExp h = fit_hyperexp(bp, fo);
    const FitQuality q = fit_quality(bp, h, fo);
    CsvWriter csv(out, digits(o));
    csv.header({"phase", "weight", "rate"});
    for (std::size_t i = 0; i < h.size(); ++i)
        csv.row({static_cast<double>(i + 1), h.phases()[i].weight, h.phases()[i].rate});
    std::cerr << "mean_rel_err=" << q.mean_rel_err << " second_rel_err=" << q.second_rel_err
              << " tail_rel_err=" << q.tail_rel_err << '\n';
}

void cmd_mg1(const Options& o, std::ostream& out)
{
    const ScenarioConfig cfg = load(o);
    const Mg1Model m = cfg.mg1();
    CsvWriter csv(out, digits(o));
    if (o.cdf) {
        csv.header({"t", "wait_cdf"});
        for (double t : t_grid(cfg))
            csv.row({t, m.wait_cdf(t, cfg.inversion)});
        return;
    }
    std::vector<std::string> head{"load", "arrival_rate", "mean_service"};
    std::vector<CsvCell> row{m.load(), m.arrival_rate(), m.service().mean()};
    const double w = m.expected_wait();
    if (want_analytic(o)) {
        head.push_back("expected_wait");
        row.emplace_back(w);
    }
    if (want_sim(o)) {
        const SimResult s = run_mg1(m, cfg.simulation);
        head.insert(head.end(), {"sim_mean_wait", "sim_ci_half_width", "sim_utilization"});
        row.insert(row.end(), {s.overall.mean_wait, s.overall.ci_half_width,
                               s.nodes.front().utilization});
        if (o.mode == "both") {
            head.push_back("agreement");
            row.emplace_back(agreement(w, s.overall));
        }
    }
    csv.header(head);
    csv.row(row);
}

void cmd_priority(const Options& o, std::ostream& out)
{
    const ScenarioConfig cfg = load(o);
    const PriorityModel m = cfg.priority();
    std::optional<SimResult> sim;
    if (want_sim(o))
        sim = run_priority(m, cfg.simulation);
    CsvWriter csv(out, digits(o));
    std::vector<std::string> head{"class", "priority_index", "arrival_rate", "load"};
    if (want_analytic(o))
        head.push_back("expected_wait");
    if (sim)
        head.insert(head.end(), {"sim_mean_wait", "sim_ci_half_width"});
    if (o.mode == "both")
        head.push_back("agreement");
    csv.header(head);
    for (const auto& c : cfg.classes) {
        const PriorityClass& pc = m.at(c.priority_index);
        const double w = m.expected_wait_class(pc.priority_index);
        std::vector<CsvCell> row{c.name, static_cast<double>(pc.priority_index), pc.arrival_rate,
                                 pc.load()};
        if (want_analytic(o))
            row.emplace_back(w);
        if (sim) {
            const WaitStats& s = sim->find("class " + std::to_string(pc.priority_index));
            row.insert(row.end(), {s.mean_wait, s.ci_half_width});
            if (o.mode == "both")
                row.emplace_back(agreement(w, s));
        }
        csv.row(row);
    }
}

void cmd_peering(const Options& o, std::ostream& out)
{
    const ScenarioConfig cfg = load(o);
    const PeeringScenario sc = cfg.peering_scenario();
    std::vector<double> sweep = cfg.peering.error_sweep;
    if (sweep.empty())
        sweep.push_back(0.0);
    CsvWriter csv(out, digits(o));
    std::vector<std::string> head{"policy", "load", "epsilon", "redirect_ratio",
                                  "new_primary_load", "primary_wait", "weighted_wait",
                                  "no_peering_wait", "reduction_percent", "sla_probability",
                                  "dropped_fraction"};
    for (const auto& p : sc.peers)
        for (const char* f : {"_share", "_dropped", "_new_load", "_redirected_wait"})
            head.push_back(p.id + f);
    if (want_sim(o))
        head.insert(head.end(), {"sim_weighted_wait", "sim_ci_half_width", "sim_dropped"});
    if (o.mode == "both")
        head.push_back("agreement");
    csv.header(head);
    for (double eps : sweep) {
        const PeeringOutcome r = evaluate_with_error(sc, eps);
        std::vector<CsvCell> row{to_string(sc.policy.kind), sc.primary.load(), eps,
                                 r.redirect_ratio, r.new_primary_load, r.primary_wait,
                                 r.weighted_wait, r.no_peering_wait, r.reduction_vs_no_peering,
                                 r.sla_probability, r.dropped_fraction};
        for (std::size_t i = 0; i < sc.peers.size(); ++i)
            row.insert(row.end(), {r.per_peer_share[i].share, r.per_peer_share[i].dropped,
                                   r.per_peer_new_load[i], r.per_peer_redirected_wait[i]});
        if (want_sim(o)) {
            if (eps != 0.0)
                throw UsageError("simulation runs do not support a measurement-error sweep");
            const SimResult s = run_peering(sc, cfg.simulation);
            row.insert(row.end(), {s.overall.mean_wait, s.overall.ci_half_width,
                                   static_cast<double>(s.dropped)});
            if (o.mode == "both")
                row.emplace_back(agreement(r.weighted_wait, s.overall));
        }
        csv.row(row);
    }
}

void cmd_simulate(const Options& o, std::ostream& out)
{
    const ScenarioConfig cfg = load(o);
    SimConfig sim = cfg.simulation;
    std::ofstream trace;
    if (!o.trace.empty()) {
        trace.open(o.trace, std::ios::binary);
        if (!trace)
            throw UsageError("cannot write " + o.trace);
        sim.trace = &trace;
    }
    SimResult r;
    if (!cfg.classes.empty())
        r = run_priority(cfg.priority(), sim);
    else if (cfg.nodes.size() > 1)
        r = run_peering(cfg.peering_scenario(), sim);
    else
        r = run_mg1(cfg.mg1(), sim);

    CsvWriter csv(out, digits(o));
    std::vector<std::string> head{"label", "count", "mean_wait", "ci_half_width"};
    for (double t : r.cdf_grid)
        head.push_back("cdf_" + csv.format(t));
    csv.header(head);
    auto emit = [&](const WaitStats& s) {
        std::vector<CsvCell> row{s.label, static_cast<double>(s.count), s.mean_wait,
                                 s.ci_half_width};
        for (double v : s.cdf)
            row.emplace_back(v);
        csv.row(row);
    };
    for (const auto& c : r.classes)
        emit(c);
    emit(r.overall);
}

VoEvent parse_event_line(const std::string& line, int number)
{
    std::istringstream in(line);
    std::string ts, name;
    in >> ts >> name;
    VoEvent ev{};
    char* end = nullptr;
    ev.timestamp = std::strtod(ts.c_str(), &end);
    if (ts.empty() || *end != '\0')
        throw UsageError("events line " + std::to_string(number) + ": bad timestamp");
    const auto kind = parse_vo_event(name);
    if (!kind)
        throw UsageError("events line " + std::to_string(number) + ": unknown event '" + name +
                         "'");
    ev.kind = *kind;
    auto split = [](const std::string& v) {
        std::vector<std::string> parts;
        std::stringstream ss(v);
        for (std::string item; std::getline(ss, item, ',');)
            if (!item.empty())
                parts.push_back(item);
        return parts;
    };
    ServiceRequirements req{0.0, 0.0, {}, 0.0};
    bool has_req = false;
    for (std::string kv; in >> kv;) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw UsageError("events line " + std::to_string(number) + ": expected key=value");
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        if (key == "peers") {
            ev.peers = split(val);
        } else if (key == "conditions") {
            for (const auto& c : split(val)) {
                if (c == "circumstances_lapsed") ev.conditions.circumstances_lapsed = true;
                else if (c == "no_longer_beneficial") ev.conditions.no_longer_beneficial = true;
                else if (c == "needs_expansion") ev.conditions.needs_expansion = true;
                else if (c == "contributions_unmet") ev.conditions.contributions_unmet = true;
                else throw UsageError("events line " + std::to_string(number) +
                                      ": unknown condition '" + c + "'");
            }
        } else if (key == "capacity" || key == "delay_threshold" || key == "duration") {
            const double v = std::strtod(val.c_str(), &end);
            if (val.empty() || *end != '\0')
                throw UsageError("events line " + std::to_string(number) + ": bad " + key);
            (key == "capacity" ? req.capacity : key == "delay_threshold" ? req.delay_threshold
                                                                          : req.duration) = v;
            has_req = true;
        } else if (key == "preference") {
            req.preference = split(val);
            has_req = true;
        } else {
            throw UsageError("events line " + std::to_string(number) + ": unknown key '" + key +
                             "'");
        }
    }
    if (has_req)
        ev.requirements = req;
    return ev;
}

void cmd_vo_trace(const Options& o, std::ostream& out)
{
    std::ifstream in(o.events);
    if (!in)
        throw UsageError("cannot open " + o.events);
    VoMachine m(o.long_term);
    int number = 0;
    for (std::string line; std::getline(in, line);) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        m = m.step(parse_event_line(line, number));
    }
    out << "timestamp,state_before,event,state_after\n" << m.export_history();
}

void cmd_auction(const Options& o, std::ostream& out)
{
    const ScenarioConfig cfg = load(o);
    const AuctionRound round = cfg.auction_round();
    out << export_round(round, run_auction(round));
}

void cmd_reproduce(const Options& o, std::ostream& out)
{
    const auto& valid = reproduce_targets();
    if (std::find(valid.begin(), valid.end(), o.target) == valid.end()) {
        std::string list;
        for (const auto& v : valid)
            list += (list.empty() ? "" : ", ") + v;
        throw UsageError("unknown target '" + o.target + "' (valid: " + list + ")");
    }
    ReproduceOptions ro;
    ro.significant_digits = digits(o);
    bool found = false;
    for (auto k : kAllPolicies)
        if (o.policy == to_string(k)) {
            ro.peering_cdf_policy = k;
            found = true;
        }
    if (!found)
        throw UsageError("--policy must be ULB, MLB, PLB or WLB");
    reproduce(o.target, out, ro);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"qpeer: queueing models of peered content delivery networks"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--round", o.round, "Print numbers with this many significant digits")
        ->check(CLI::Range(1, 17));
    app.add_option("--out", o.out, "Write CSV here instead of stdout");

    auto* fit = app.add_subcommand("fit", "Fit a hyper-exponential to a Bounded Pareto law");
    fit->add_option("--alpha", o.alpha, "Tail exponent");
    fit->add_option("--k", o.k, "Smallest task size");
    fit->add_option("--p", o.p, "Largest task size");
    fit->add_option("--phases", o.phases, "Number of exponential phases");

    const std::vector<std::string> modes{"analytic", "simulate", "both"};
    auto* mg1 = app.add_subcommand("mg1", "Single CDN as an M/G/1 queue");
    mg1->add_option("config", o.config, "Scenario file")->required()->check(CLI::ExistingFile);
    mg1->add_option("--mode", o.mode)->check(CLI::IsMember(modes));
    mg1->add_flag("--cdf", o.cdf, "Print the waiting-time CDF instead of the summary");

    auto* prio = app.add_subcommand("priority", "Non-preemptive priority classes");
    prio->add_option("config", o.config, "Scenario file")->required()->check(CLI::ExistingFile);
    prio->add_option("--mode", o.mode)->check(CLI::IsMember(modes));

    auto* peer = app.add_subcommand("peering", "Primary CDN shedding load to peers");
    peer->add_option("config", o.config, "Scenario file")->required()->check(CLI::ExistingFile);
    peer->add_option("--mode", o.mode)->check(CLI::IsMember(modes));

    auto* sim = app.add_subcommand("simulate", "Discrete-event simulation of a scenario");
    sim->add_option("config", o.config, "Scenario file")->required()->check(CLI::ExistingFile);
    sim->add_option("--trace", o.trace, "Per-request trace CSV");

    auto* vo = app.add_subcommand("vo-trace", "Replay VO lifecycle events");
    vo->add_option("events", o.events, "One event per line: timestamp Event key=value ...")
        ->required()
        ->check(CLI::ExistingFile);
    vo->add_flag("--long-term", o.long_term, "Allow pre-existing peering policies");

    auto* auc = app.add_subcommand("auction", "Evaluate one sealed-bid reverse auction");
    auc->add_option("config", o.config, "Scenario file")->required()->check(CLI::ExistingFile);

    auto* rep = app.add_subcommand("reproduce", "Write the data behind a figure or table");
    rep->add_option("target", o.target, "fig10, fig13 ... fig19, table6")->required();
    rep->add_option("--policy", o.policy, "Redirection policy for fig14");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        std::ofstream file;
        if (!o.out.empty()) {
            file.open(o.out, std::ios::binary);
            if (!file)
                throw UsageError("cannot write " + o.out);
        }
        std::ostream& out = o.out.empty() ? std::cout : file;
        if (*fit) cmd_fit(o, out);
        else if (*mg1) cmd_mg1(o, out);
        else if (*prio) cmd_priority(o, out);
        else if (*peer) cmd_peering(o, out);
        else if (*sim) cmd_simulate(o, out);
        else if (*vo) cmd_vo_trace(o, out);
        else if (*auc) cmd_auction(o, out);
        else if (*rep) cmd_reproduce(o, out);
        return 0;
    } catch (const UsageError& e) {
        std::cerr << "qpeer: " << e.what() << '\n';
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "qpeer: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "qpeer: " << e.what() << '\n';
        return 2;
    }
}
