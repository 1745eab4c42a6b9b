#include "qpeer/config.hpp"

#include "qpeer/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <tuple>

namespace qpeer {

namespace {

struct Entry {
    std::string value;
    int line;
};

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto piece = trim(std::string_view(s).substr(
            start, comma == std::string::npos ? std::string::npos : comma - start));
        if (!piece.empty())
            out.push_back(piece);
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return out;
}

double to_number(const std::string& text, int line, const std::string& field)
{
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ConfigError(line, field, "expected a number, got '" + text + "'");
    return v;
}

class Section {
public:
    Section(std::string kind, std::string name, int line)
        : kind_(std::move(kind)), name_(std::move(name)), line_(line)
    {
    }

    void add(const std::string& key, const std::string& value, int line)
    {
        if (!entries_.emplace(key, Entry{value, line}).second)
            throw ConfigError(line, key, "duplicate key");
    }

    const std::string& name() const { return name_; }
    int line() const { return line_; }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::optional<Entry> take(const std::string& key)
    {
        const auto it = entries_.find(key);
        if (it == entries_.end())
            return std::nullopt;
        Entry e = it->second;
        entries_.erase(it);
        return e;
    }

    std::optional<double> number(const std::string& key)
    {
        const auto e = take(key);
        if (!e)
            return std::nullopt;
        return to_number(e->value, e->line, key);
    }

    std::optional<double> positive(const std::string& key)
    {
        const int l = line_of(key);
        const auto v = number(key);
        if (v && !(*v > 0.0))
            throw ConfigError(l, key, "must be positive");
        return v;
    }

    std::optional<long long> integer(const std::string& key)
    {
        const int l = line_of(key);
        const auto v = number(key);
        if (!v)
            return std::nullopt;
        if (*v != static_cast<double>(static_cast<long long>(*v)))
            throw ConfigError(l, key, "expected an integer");
        return static_cast<long long>(*v);
    }

    std::optional<std::vector<double>> numbers(const std::string& key)
    {
        const auto e = take(key);
        if (!e)
            return std::nullopt;
        std::vector<double> out;
        for (const auto& piece : split_list(e->value))
            out.push_back(to_number(piece, e->line, key));
        return out;
    }

    int line_of(const std::string& key) const
    {
        const auto it = entries_.find(key);
        return it == entries_.end() ? line_ : it->second.line;
    }

    // Anything not consumed is a typo or an unsupported field.
    void finish() const
    {
        if (!entries_.empty()) {
            const auto& [key, e] = *entries_.begin();
            throw ConfigError(e.line, key, "unknown key in [" + kind_ + "] section");
        }
    }

private:
    std::string kind_;
    std::string name_;
    int line_;
    std::map<std::string, Entry> entries_;
};

template <class F>
auto guarded(int line, const std::string& field, F&& f)
{
    try {
        return f();
    } catch (const DomainError& e) {
        throw ConfigError(line, field, e.what());
    }
}

ServiceConfig read_service(Section& s)
{
    ServiceConfig svc;
    const auto dist = s.take("distribution");
    if (!dist)
        throw ConfigError(s.line(), "distribution", "missing in [" + s.name() + "]");
    if (dist->value == "bounded_pareto") {
        const int l = dist->line;
        const int la = s.line_of("alpha");
        const int lk = s.line_of("k_time_units");
        const int lp = s.line_of("p_time_units");
        const auto alpha = s.number("alpha");
        const auto k = s.number("k_time_units");
        const auto p = s.number("p_time_units");
        if (!alpha || !k || !p)
            throw ConfigError(l, "distribution",
                              "bounded_pareto needs alpha, k_time_units and p_time_units");
        if (!(*alpha > 0.0 && *alpha <= 2.0))
            throw ConfigError(la, "alpha", "must lie in (0, 2]");
        if (!(*k > 0.0))
            throw ConfigError(lk, "k_time_units", "must be positive");
        if (!(*p > *k))
            throw ConfigError(lp, "p_time_units", "must exceed k_time_units");
        svc.bounded_pareto = guarded(l, "distribution", [&] { return BoundedPareto(*alpha, *k, *p); });
    } else if (dist->value == "hyperexp") {
        const auto ph = s.take("phases");
        if (!ph)
            throw ConfigError(dist->line, "phases", "hyperexp needs phases = weight:rate, ...");
        std::vector<Phase> phases;
        for (const auto& piece : split_list(ph->value)) {
            const auto colon = piece.find(':');
            if (colon == std::string::npos)
                throw ConfigError(ph->line, "phases", "expected weight:rate, got '" + piece + "'");
            phases.push_back(Phase{to_number(trim(piece.substr(0, colon)), ph->line, "phases"),
                                   to_number(trim(piece.substr(colon + 1)), ph->line, "phases")});
        }
        svc.hyperexp = guarded(ph->line, "phases", [&] { return HyperExp(std::move(phases)); });
    } else if (dist->value == "exponential") {
        const int l = s.line_of("rate_per_time_unit");
        const auto rate = s.positive("rate_per_time_unit");
        if (!rate)
            throw ConfigError(dist->line, "rate_per_time_unit", "exponential needs a rate");
        svc.hyperexp = guarded(l, "rate_per_time_unit", [&] { return HyperExp::exponential(*rate); });
    } else {
        throw ConfigError(dist->line, "distribution",
                          "expected bounded_pareto, hyperexp or exponential, got '" + dist->value +
                              "'");
    }
    return svc;
}

template <class T>
void read_rate(Section& s, T& target)
{
    const int ll = s.line_of("load");
    const int lr = s.line_of("arrival_rate_per_time_unit");
    target.load = s.number("load");
    target.arrival_rate = s.number("arrival_rate_per_time_unit");
    if (target.load.has_value() == target.arrival_rate.has_value())
        throw ConfigError(s.line(), "load",
                          "give exactly one of load and arrival_rate_per_time_unit");
    if (target.load && !(*target.load >= 0.0 && *target.load < 1.0))
        throw ConfigError(ll, "load", "must lie in [0, 1)");
    if (target.arrival_rate && !(*target.arrival_rate >= 0.0))
        throw ConfigError(lr, "arrival_rate_per_time_unit", "must be non-negative");
}

PolicyKind parse_policy(const Entry& e)
{
    for (auto k : {PolicyKind::ULB, PolicyKind::MLB, PolicyKind::PLB, PolicyKind::WLB})
        if (e.value == to_string(k))
            return k;
    throw ConfigError(e.line, "policy", "expected ULB, MLB, PLB or WLB, got '" + e.value + "'");
}

class FitCache {
public:
    explicit FitCache(const FitOptions& opts) : opts_(opts) {}

    HyperExp get(const ServiceConfig& svc, int line, const std::string& owner)
    {
        if (svc.hyperexp)
            return *svc.hyperexp;
        const auto& bp = *svc.bounded_pareto;
        const auto key = std::make_tuple(bp.alpha(), bp.k(), bp.p());
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            try {
                it = cache_.emplace(key, fit_hyperexp(bp, opts_)).first;
            } catch (const FitError& e) {
                throw ConfigError(line, owner, e.what());
            }
        }
        return it->second;
    }

private:
    FitOptions opts_;
    std::map<std::tuple<double, double, double>, HyperExp> cache_;
};

template <class T>
double rate_of(const T& item, const HyperExp& service)
{
    return item.arrival_rate ? *item.arrival_rate : *item.load / service.mean();
}

CdnNode build_node(const NodeConfig& n, FitCache& fits)
{
    const HyperExp svc = fits.get(n.service, n.line, n.id);
    return CdnNode{n.id, rate_of(n, svc), svc, n.acceptance_threshold, n.role};
}

} // namespace

ScenarioConfig parse_config(std::istream& in)
{
    ScenarioConfig cfg;
    std::set<std::string> seen;
    std::optional<Section> current;
    std::string kind;

    auto close = [&] {
        if (!current)
            return;
        Section& s = *current;
        if (kind == "simulation") {
            const int ls = s.line_of("seed");
            if (auto v = s.integer("seed")) {
                if (*v < 0)
                    throw ConfigError(ls, "seed", "must be non-negative");
                cfg.simulation.seed = static_cast<std::uint64_t>(*v);
            }
            if (auto v = s.integer("arrivals"))
                cfg.simulation.arrivals = static_cast<std::uint64_t>(std::max(0LL, *v));
            const int lw = s.line_of("warmup_fraction");
            const int lb = s.line_of("batches");
            if (auto v = s.number("warmup_fraction")) {
                if (!(*v >= 0.0 && *v < 0.5))
                    throw ConfigError(lw, "warmup_fraction",
                                      "must lie in [0, 0.5)");
                cfg.simulation.warmup_fraction = *v;
            }
            if (auto v = s.integer("batches")) {
                if (*v < 10)
                    throw ConfigError(lb, "batches", "must be at least 10");
                cfg.simulation.batches = static_cast<int>(*v);
            }
            guarded(s.line(), "simulation", [&] { cfg.simulation.validate(); return 0; });
        } else if (kind == "inversion") {
            if (auto v = s.integer("terms"))
                cfg.inversion.terms = static_cast<int>(*v);
            if (auto v = s.integer("euler_depth"))
                cfg.inversion.euler_depth = static_cast<int>(*v);
            if (auto v = s.number("precision_target"))
                cfg.inversion.precision_target = *v;
            guarded(s.line(), "inversion", [&] { cfg.inversion.validate(); return 0; });
        } else if (kind == "fit") {
            if (auto v = s.integer("phases"))
                cfg.fit.phases = static_cast<int>(*v);
            if (auto v = s.integer("checkpoints"))
                cfg.fit.checkpoints = static_cast<int>(*v);
            if (auto v = s.positive("checkpoint_lo_factor"))
                cfg.fit.checkpoint_lo_factor = *v;
            if (auto v = s.positive("checkpoint_hi_factor"))
                cfg.fit.checkpoint_hi_factor = *v;
            if (auto v = s.positive("moment_tolerance"))
                cfg.fit.moment_tolerance = *v;
            if (auto v = s.positive("tail_tolerance"))
                cfg.fit.tail_tolerance = *v;
        } else if (kind == "output") {
            const int lg = s.line_of("t_grid_time_units");
            if (auto v = s.numbers("t_grid_time_units")) {
                if (!std::is_sorted(v->begin(), v->end()) ||
                    std::any_of(v->begin(), v->end(), [](double t) { return t < 0.0; }))
                    throw ConfigError(lg, "t_grid_time_units",
                                      "must be non-negative and ascending");
                cfg.t_grid = *v;
                cfg.simulation.cdf_grid = *v;
            }
        } else if (kind == "peering") {
            auto& pc = cfg.peering;
            if (auto e = s.take("policy"))
                pc.policy.kind = parse_policy(*e);
            if (auto v = s.numbers("plb_weights"))
                pc.policy.plb_weights = *v;
            if (auto v = s.number("wlb_top_share"))
                pc.policy.wlb_top_share = *v;
            if (auto v = s.number("threshold_load"))
                pc.threshold_load = *v;
            if (auto v = s.positive("sla_deadline_time_units"))
                pc.sla_deadline = *v;
            if (auto v = s.number("peer_load_cap"))
                pc.peer_load_cap = *v;
            if (auto e = s.take("baseline")) {
                if (e->value == "same_load")
                    pc.baseline = ReductionBaseline::SameLoad;
                else if (e->value == "threshold_load")
                    pc.baseline = ReductionBaseline::ThresholdLoad;
                else
                    throw ConfigError(e->line, "baseline", "expected same_load or threshold_load");
            }
            if (auto v = s.numbers("error_sweep"))
                pc.error_sweep = *v;
        } else if (kind == "auction") {
            auto& ac = cfg.auction;
            if (auto v = s.number("managing_cost"))
                ac.managing_cost = *v;
            if (auto v = s.number("expected_profit"))
                ac.expected_profit = *v;
            if (auto v = s.number("evaluation_time_units"))
                ac.evaluation_time = *v;
            const auto cap = s.number("capacity_work_per_time_unit");
            const auto delay = s.number("delay_threshold_time_units");
            const auto dur = s.number("duration_time_units");
            const auto pref = s.take("preference");
            if (cap || delay || dur) {
                if (!cap || !delay || !dur)
                    throw ConfigError(s.line(), "capacity_work_per_time_unit",
                                      "policy needs capacity, delay threshold and duration");
                AuctionPolicy pol{*cap, *delay, pref ? split_list(pref->value)
                                                     : std::vector<std::string>{},
                                  *dur};
                guarded(s.line(), "auction", [&] { pol.validate(); return 0; });
                ac.policy = pol;
            }
        } else if (kind == "node") {
            NodeConfig n;
            n.id = s.name();
            n.line = s.line();
            if (auto e = s.take("role")) {
                if (e->value == "primary")
                    n.role = NodeRole::Primary;
                else if (e->value == "peer")
                    n.role = NodeRole::Peer;
                else
                    throw ConfigError(e->line, "role", "expected primary or peer");
            }
            n.service = read_service(s);
            read_rate(s, n);
            const int tl = s.line_of("acceptance_threshold");
            if (auto v = s.number("acceptance_threshold")) {
                if (!(*v >= 0.0 && *v <= 1.0))
                    throw ConfigError(tl, "acceptance_threshold", "must lie in [0, 1]");
                n.acceptance_threshold = *v;
            }
            cfg.nodes.push_back(std::move(n));
        } else if (kind == "class") {
            ClassConfig c;
            c.name = s.name();
            c.line = s.line();
            const int pl = s.line_of("priority_index");
            const auto idx = s.integer("priority_index");
            if (!idx || *idx < 1)
                throw ConfigError(pl, "priority_index", "needs a positive integer");
            c.priority_index = static_cast<int>(*idx);
            c.service = read_service(s);
            read_rate(s, c);
            cfg.classes.push_back(std::move(c));
        } else if (kind == "bid") {
            BidConfig b;
            b.bidder = s.name();
            b.line = s.line();
            b.amount = s.number("amount");
            if (auto v = s.number("incurred_cost"))
                b.incurred_cost = *v;
            if (auto v = s.number("expected_revenue"))
                b.expected_revenue = *v;
            const int il = s.line_of("interest");
            if (auto v = s.number("interest")) {
                if (*v < 0.0)
                    throw ConfigError(il, "interest", "must be non-negative");
                b.interest = *v;
            }
            if (auto v = s.number("valid_until_time_units"))
                b.valid_until = *v;
            cfg.auction.bids.push_back(std::move(b));
        }
        s.finish();
        current.reset();
    };

    static const std::set<std::string> singletons = {"simulation", "inversion", "fit", "output",
                                                     "peering", "auction"};
    static const std::set<std::string> named = {"node", "class", "bid"};

    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find_first_of("#;");
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty())
            continue;
        if (text.front() == '[') {
            if (text.back() != ']')
                throw ConfigError(line, "", "unterminated section header");
            close();
            const std::string inner = trim(text.substr(1, text.size() - 2));
            const auto space = inner.find_first_of(" \t");
            kind = inner.substr(0, space);
            const std::string name = space == std::string::npos ? "" : trim(inner.substr(space));
            if (singletons.count(kind)) {
                if (!name.empty())
                    throw ConfigError(line, kind, "section takes no name");
            } else if (named.count(kind)) {
                if (name.empty())
                    throw ConfigError(line, kind, "section needs a name, e.g. [" + kind + " x]");
            } else {
                throw ConfigError(line, kind, "unknown section");
            }
            if (!seen.insert(kind + " " + name).second)
                throw ConfigError(line, kind, "duplicate section");
            current.emplace(kind, name, line);
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line, "", "expected key = value");
        if (!current)
            throw ConfigError(line, trim(text.substr(0, eq)), "key outside any section");
        const std::string key = trim(text.substr(0, eq));
        if (key.empty())
            throw ConfigError(line, "", "empty key");
        current->add(key, trim(text.substr(eq + 1)), line);
    }
    close();
    return cfg;
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(0, "", "cannot open " + path);
    return parse_config(in);
}

HyperExp resolve_service(const ServiceConfig& service, const FitOptions& fit)
{
    if (service.hyperexp)
        return *service.hyperexp;
    return fit_hyperexp(*service.bounded_pareto, fit);
}

Mg1Model ScenarioConfig::mg1() const
{
    const NodeConfig* node = nullptr;
    if (nodes.size() == 1) {
        node = &nodes.front();
    } else {
        for (const auto& n : nodes)
            if (n.role == NodeRole::Primary)
                node = &n;
    }
    if (node == nullptr)
        throw ConfigError(0, "node", "need a single [node] or one with role = primary");
    FitCache fits(fit);
    const HyperExp svc = fits.get(node->service, node->line, node->id);
    const double rate = rate_of(*node, svc);
    if (!(rate > 0.0))
        throw ConfigError(node->line, "load", "M/G/1 needs a positive arrival rate");
    return Mg1Model(rate, svc);
}

PriorityModel ScenarioConfig::priority() const
{
    if (classes.empty())
        throw ConfigError(0, "class", "need at least one [class] section");
    FitCache fits(fit);
    std::vector<PriorityClass> out;
    for (const auto& c : classes) {
        const HyperExp svc = fits.get(c.service, c.line, c.name);
        out.push_back(PriorityClass{rate_of(c, svc), svc, c.priority_index});
    }
    return guarded(classes.front().line, "priority_index",
                   [&] { return PriorityModel(std::move(out)); });
}

PeeringScenario ScenarioConfig::peering_scenario() const
{
    FitCache fits(fit);
    std::optional<CdnNode> primary;
    std::vector<CdnNode> peers;
    for (const auto& n : nodes) {
        if (n.role == NodeRole::Primary) {
            if (primary)
                throw ConfigError(n.line, "role", "more than one primary node");
            primary = build_node(n, fits);
        } else {
            peers.push_back(build_node(n, fits));
        }
    }
    if (!primary)
        throw ConfigError(0, "role", "no node with role = primary");
    PeeringScenario sc{*primary, std::move(peers), peering.policy, peering.threshold_load,
                       peering.sla_deadline, peering.peer_load_cap, peering.baseline, inversion};
    guarded(0, "peering", [&] { sc.validate(); return 0; });
    return sc;
}

AuctionRound ScenarioConfig::auction_round() const
{
    AuctionRound round{payoff_value(auction.managing_cost, auction.expected_profit),
                       auction.policy.value_or(AuctionPolicy{1.0, 1.0, {}, 1.0}),
                       {},
                       auction.evaluation_time};
    for (const auto& b : auction.bids) {
        const double amount =
            b.amount ? *b.amount
                     : bidding_function(b.incurred_cost, b.expected_revenue, b.interest);
        if (!(amount >= 0.0))
            throw ConfigError(b.line, "amount", "bid amounts must be non-negative");
        round.bids.push_back(Bid{b.bidder, amount, b.valid_until});
    }
    return round;
}

} // namespace qpeer
