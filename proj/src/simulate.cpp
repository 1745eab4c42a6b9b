#include "qpeer/simulate.hpp"

#include "qpeer/error.hpp"
#include "qpeer/rng.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <queue>
#include <variant>

namespace qpeer {

namespace {

using Sampler = std::variant<HyperExp, BoundedPareto>;

double draw(const Sampler& s, RandomStream& rng)
{
    if (const auto* h = std::get_if<HyperExp>(&s)) {
        const double u1 = rng.uniform();
        return h->sample(u1, rng.uniform());
    }
    return std::get<BoundedPareto>(s).sample(rng.uniform());
}

double sampler_mean(const Sampler& s)
{
    if (const auto* h = std::get_if<HyperExp>(&s))
        return h->mean();
    return std::get<BoundedPareto>(s).moment(1.0);
}

struct ClassSpec {
    std::string label;
    int priority;
    Sampler service;
};

struct NodeSpec {
    std::string id;
    std::vector<ClassSpec> classes;
};

struct Route {
    int node;
    int cls;
    double probability;
};

struct SourceSpec {
    double rate;
    bool counted;
    std::vector<Route> routes;  // probabilities may sum below 1; the rest is dropped
};

struct Network {
    std::vector<NodeSpec> nodes;
    std::vector<SourceSpec> sources;
};

struct Request {
    double arrival;
    std::size_t slot;                                   // index into its class's waits
    std::size_t origin_slot;                            // index into overall waits, or npos
    bool observed;
};

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct Event {
    double time;
    std::uint64_t seq;
    int kind;  // 0 arrival, 1 departure
    int index; // source or node

    bool operator>(const Event& o) const noexcept
    {
        return time != o.time ? time > o.time : seq > o.seq;
    }
};

struct NodeState {
    std::vector<std::deque<Request>> queues;  // by class, FCFS
    std::vector<int> order;                   // class indices, highest priority first
    bool busy = false;
    RandomStream service_rng{0};
    std::vector<std::pair<double, double>> busy_spans;
};

WaitStats summarize(const std::string& label, const std::vector<double>& waits, int batches,
                    const std::vector<double>& grid)
{
    WaitStats st;
    st.label = label;
    st.count = waits.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (waits.empty()) {
        st.mean_wait = nan;
        st.ci_half_width = nan;
        st.cdf.assign(grid.size(), nan);
        return st;
    }
    double sum = 0.0;
    for (double w : waits)
        sum += w;
    st.mean_wait = sum / static_cast<double>(waits.size());

    const std::size_t per = waits.size() / static_cast<std::size_t>(batches);
    if (per < 2) {
        st.ci_half_width = nan;
    } else {
        double mean_of_means = 0.0;
        std::vector<double> means;
        for (int b = 0; b < batches; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < per; ++i)
                acc += waits[static_cast<std::size_t>(b) * per + i];
            means.push_back(acc / static_cast<double>(per));
            mean_of_means += means.back();
        }
        mean_of_means /= batches;
        double var = 0.0;
        for (double m : means)
            var += (m - mean_of_means) * (m - mean_of_means);
        var /= batches - 1;
        const boost::math::students_t dist(batches - 1);
        st.ci_half_width =
            boost::math::quantile(dist, 0.975) * std::sqrt(var / static_cast<double>(batches));
    }

    std::vector<double> sorted = waits;
    std::sort(sorted.begin(), sorted.end());
    for (double t : grid) {
        const auto n = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
        st.cdf.push_back(static_cast<double>(n) / static_cast<double>(sorted.size()));
    }
    return st;
}

NodeStats utilization(const std::string& id, const std::vector<std::pair<double, double>>& spans,
                      double from, double to, int batches)
{
    NodeStats ns;
    ns.id = id;
    const double width = (to - from) / batches;
    if (!(width > 0.0))
        return ns;
    std::vector<double> busy(static_cast<std::size_t>(batches), 0.0);
    for (auto [a, b] : spans) {
        a = std::max(a, from);
        b = std::min(b, to);
        while (a < b) {
            auto k = std::min(static_cast<std::size_t>((a - from) / width), busy.size() - 1);
            auto edge = [&](std::size_t i) {
                return i + 1 == busy.size() ? to : from + width * static_cast<double>(i + 1);
            };
            while (edge(k) <= a && k + 1 < busy.size())
                ++k;
            const double stop = std::min(b, edge(k));
            busy[k] += stop - a;
            if (stop <= a)
                break;
            a = stop;
        }
    }
    double mean = 0.0;
    for (double& v : busy) {
        v /= width;
        mean += v;
    }
    mean /= batches;
    double var = 0.0;
    for (double v : busy)
        var += (v - mean) * (v - mean);
    var /= batches - 1;
    ns.utilization = mean;
    ns.utilization_se = std::sqrt(var / batches);
    return ns;
}

SimResult run(const Network& net, const SimConfig& cfg)
{
    cfg.validate();
    if (std::none_of(net.sources.begin(), net.sources.end(),
                     [](const SourceSpec& s) { return s.counted && s.rate > 0.0; }))
        throw DomainError("simulation: no arrivals to count");
    const std::size_t n_nodes = net.nodes.size();

    std::vector<NodeState> nodes(n_nodes);
    std::vector<std::vector<std::vector<double>>> waits(n_nodes);
    for (std::size_t n = 0; n < n_nodes; ++n) {
        const auto& spec = net.nodes[n];
        nodes[n].queues.resize(spec.classes.size());
        waits[n].resize(spec.classes.size());
        for (std::size_t c = 0; c < spec.classes.size(); ++c)
            nodes[n].order.push_back(static_cast<int>(c));
        std::stable_sort(nodes[n].order.begin(), nodes[n].order.end(), [&](int a, int b) {
            return spec.classes[static_cast<std::size_t>(a)].priority >
                   spec.classes[static_cast<std::size_t>(b)].priority;
        });
        nodes[n].service_rng =
            make_stream(cfg.seed, n, static_cast<std::uint64_t>(StreamPurpose::Service));
    }
    std::vector<RandomStream> arrival_rng;
    std::vector<RandomStream> routing_rng;
    for (std::size_t s = 0; s < net.sources.size(); ++s) {
        arrival_rng.push_back(make_stream(
            cfg.seed, s, static_cast<std::uint64_t>(StreamPurpose::Arrivals) + s));
        routing_rng.push_back(
            make_stream(cfg.seed, s, static_cast<std::uint64_t>(StreamPurpose::Routing)));
    }
    std::vector<double> overall;

    std::priority_queue<Event, std::vector<Event>, std::greater<>> calendar;
    std::uint64_t seq = 0;
    for (std::size_t s = 0; s < net.sources.size(); ++s) {
        if (net.sources[s].rate > 0.0)
            calendar.push(Event{arrival_rng[s].exponential(net.sources[s].rate), seq++, 0,
                                static_cast<int>(s)});
    }

    const auto warmup_index = static_cast<std::uint64_t>(
        std::ceil(cfg.warmup_fraction * static_cast<double>(cfg.arrivals)));
    std::uint64_t counted = 0;
    double warmup_time = 0.0;
    double end_time = std::numeric_limits<double>::infinity();
    double first_observed = 0.0;
    double last_observed = 0.0;
    std::uint64_t observed_counted = 0;
    bool warm = warmup_index == 0;
    std::uint64_t dropped = 0;

    auto start_service = [&](std::size_t n, double now) {
        NodeState& st = nodes[n];
        for (int c : st.order) {
            auto& q = st.queues[static_cast<std::size_t>(c)];
            if (q.empty())
                continue;
            const Request r = q.front();
            q.pop_front();
            const double service =
                draw(net.nodes[n].classes[static_cast<std::size_t>(c)].service, st.service_rng);
            const double wait = now - r.arrival;
            if (r.observed) {
                waits[n][static_cast<std::size_t>(c)][r.slot] = wait;
                if (r.origin_slot != kNone)
                    overall[r.origin_slot] = wait;
            }
            if (cfg.trace) {
                char line[256];
                std::snprintf(line, sizeof line, "%.17g,%s,%s,%.17g,%.17g,%.17g\n", r.arrival,
                              net.nodes[n].classes[static_cast<std::size_t>(c)].label.c_str(),
                              net.nodes[n].id.c_str(), wait, service, now + service);
                *cfg.trace << line;
            }
            st.busy = true;
            st.busy_spans.emplace_back(now, now + service);
            calendar.push(Event{now + service, seq++, 1, static_cast<int>(n)});
            return;
        }
        st.busy = false;
    };

    if (cfg.trace)
        *cfg.trace << "arrival_time,class,node,wait,service,departure\n";

    while (!calendar.empty()) {
        const Event ev = calendar.top();
        calendar.pop();
        const double now = ev.time;
        if (ev.kind == 1) {
            start_service(static_cast<std::size_t>(ev.index), now);
            continue;
        }
        const auto s = static_cast<std::size_t>(ev.index);
        const SourceSpec& src = net.sources[s];
        if (now > end_time)
            continue;
        if (src.counted) {
            ++counted;
            if (!warm && counted > warmup_index) {
                warm = true;
                warmup_time = now;
            }
            if (counted == cfg.arrivals)
                end_time = now;
        }
        const bool observed = warm && now >= warmup_time;
        if (observed && src.counted) {
            if (observed_counted == 0)
                first_observed = now;
            last_observed = now;
            ++observed_counted;
        }
        if (now < end_time)
            calendar.push(Event{now + arrival_rng[s].exponential(src.rate), seq++, 0,
                                static_cast<int>(s)});

        const Route* route = &src.routes.front();
        if (src.routes.size() > 1 || src.routes.front().probability < 1.0) {
            const double u = routing_rng[s].uniform();
            double acc = 0.0;
            route = nullptr;
            for (const auto& r : src.routes) {
                acc += r.probability;
                if (u < acc) {
                    route = &r;
                    break;
                }
            }
        }
        if (route == nullptr) {
            ++dropped;
            continue;
        }
        const auto n = static_cast<std::size_t>(route->node);
        const auto c = static_cast<std::size_t>(route->cls);
        Request req{now, kNone, kNone, observed};
        if (observed) {
            req.slot = waits[n][c].size();
            waits[n][c].push_back(0.0);
            if (src.counted) {
                req.origin_slot = overall.size();
                overall.push_back(0.0);
            }
        }
        nodes[n].queues[c].push_back(req);
        if (!nodes[n].busy)
            start_service(n, now);
    }

    SimResult res;
    res.cdf_grid = cfg.cdf_grid;
    for (std::size_t n = 0; n < n_nodes; ++n) {
        for (std::size_t c = 0; c < net.nodes[n].classes.size(); ++c)
            res.classes.push_back(
                summarize(net.nodes[n].classes[c].label, waits[n][c], cfg.batches, cfg.cdf_grid));
        res.nodes.push_back(
            utilization(net.nodes[n].id, nodes[n].busy_spans, warmup_time, end_time, cfg.batches));
    }
    res.overall = summarize("overall", overall, cfg.batches, cfg.cdf_grid);
    res.dropped = dropped;
    if (observed_counted > 1) {
        res.interarrival_mean =
            (last_observed - first_observed) / static_cast<double>(observed_counted - 1);
        res.interarrival_se = res.interarrival_mean / std::sqrt(static_cast<double>(observed_counted - 1));
    }
    return res;
}

Network single_node(const std::string& id, std::vector<ClassSpec> classes,
                    const std::vector<double>& rates)
{
    Network net;
    net.nodes.push_back(NodeSpec{id, std::move(classes)});
    for (std::size_t c = 0; c < rates.size(); ++c)
        net.sources.push_back(SourceSpec{rates[c], true, {Route{0, static_cast<int>(c), 1.0}}});
    return net;
}

} // namespace

void SimConfig::validate() const
{
    if (batches < 10)
        throw DomainError("simulation: need at least 10 batches");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 0.5))
        throw DomainError("simulation: warmup fraction must lie in [0, 0.5)");
    if (arrivals < 2)
        throw DomainError("simulation: horizon must cover at least two arrivals");
    if (!std::is_sorted(cdf_grid.begin(), cdf_grid.end()))
        throw DomainError("simulation: CDF grid must be sorted");
}

const WaitStats& SimResult::find(const std::string& label) const
{
    for (const auto& c : classes)
        if (c.label == label)
            return c;
    throw DomainError("simulation result: no class labelled " + label);
}

SimResult run_mg1(const Mg1Model& model, const SimConfig& cfg)
{
    if (model.load() >= 1.0)
        throw InstabilityError("mg1", model.load());
    return run(single_node("mg1", {ClassSpec{"wait", 1, model.service()}}, {model.arrival_rate()}),
               cfg);
}

SimResult run_mg1(double arrival_rate, const BoundedPareto& service, const SimConfig& cfg)
{
    const Sampler s = service;
    const double load = arrival_rate * sampler_mean(s);
    if (!(arrival_rate > 0.0))
        throw DomainError("mg1: arrival rate must be positive");
    if (load >= 1.0)
        throw InstabilityError("mg1", load);
    return run(single_node("mg1", {ClassSpec{"wait", 1, s}}, {arrival_rate}), cfg);
}

SimResult run_priority(const PriorityModel& model, const SimConfig& cfg)
{
    if (model.load() >= 1.0)
        throw InstabilityError("priority", model.load());
    std::vector<ClassSpec> classes;
    std::vector<double> rates;
    for (const auto& c : model.classes()) {
        classes.push_back(ClassSpec{"class " + std::to_string(c.priority_index), c.priority_index,
                                    c.service});
        rates.push_back(c.arrival_rate);
    }
    return run(single_node("priority", std::move(classes), rates), cfg);
}

SimResult run_peering(const PeeringScenario& sc, const SimConfig& cfg)
{
    sc.validate();
    const CdnNode& p = sc.primary;
    const double rho = p.load();
    const double shed = std::max(0.0, rho - sc.threshold_load);
    const double redirected_rate = shed / p.service.mean();

    std::vector<double> peer_waits;
    for (const auto& peer : sc.peers)
        peer_waits.push_back(peer.arrival_rate > 0.0
                                 ? Mg1Model(peer.arrival_rate, peer.service).expected_wait()
                                 : 0.0);
    const RedirectionSplit split =
        split_redirected(sc.policy, sc.peers, peer_waits, redirected_rate, sc.peer_load_cap);

    Network net;
    net.nodes.push_back(NodeSpec{p.id, {ClassSpec{"primary", 1, p.service}}});
    SourceSpec primary_src{p.arrival_rate, true, {}};
    primary_src.routes.push_back(Route{0, 0, (p.arrival_rate - redirected_rate) / p.arrival_rate});
    for (std::size_t i = 0; i < sc.peers.size(); ++i) {
        const CdnNode& peer = sc.peers[i];
        const int node = static_cast<int>(i + 1);
        net.nodes.push_back(NodeSpec{peer.id,
                                     {ClassSpec{peer.id + "/native", 1, peer.service},
                                      ClassSpec{peer.id + "/redirected", 2, peer.service}}});
        if (peer.load() + split.accepted[i] * peer.service.mean() >= 1.0)
            throw InstabilityError(peer.id, peer.load() + split.accepted[i] * peer.service.mean());
        if (split.accepted[i] > 0.0)
            primary_src.routes.push_back(Route{node, 1, split.accepted[i] / p.arrival_rate});
        net.sources.push_back(SourceSpec{peer.arrival_rate, false, {Route{node, 0, 1.0}}});
    }
    net.sources.insert(net.sources.begin(), primary_src);
    return run(net, cfg);
}

} // namespace qpeer
