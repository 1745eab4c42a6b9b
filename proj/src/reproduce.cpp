#include "qpeer/reproduce.hpp"

#include "qpeer/csv.hpp"
#include "qpeer/error.hpp"
#include "qpeer/mg1.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>

namespace qpeer {

namespace {

std::string label(const char* prefix, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%g", prefix, v);
    return buf;
}

std::vector<double> load_grid()
{
    std::vector<double> g;
    for (int i = 2; i <= 18; ++i)
        g.push_back(i * 0.05);
    return g;
}

std::vector<double> error_grid()
{
    std::vector<double> g;
    for (int i = -4; i <= 4; ++i)
        g.push_back(i * 0.05);
    return g;
}

void cdf_table(CsvWriter& csv, const std::vector<double>& loads,
               const std::function<double(double, double)>& cdf)
{
    std::vector<std::string> head{"t"};
    for (double r : loads)
        head.push_back(label("rho_", r));
    csv.header(head);
    for (double t : cdf_time_grid()) {
        std::vector<CsvCell> row{t};
        for (double r : loads)
            row.emplace_back(cdf(r, t));
        csv.row(row);
    }
}

void fig10(CsvWriter& csv, const ReproduceOptions& o)
{
    const ReferenceLaws laws = reference_laws(o.fit);
    cdf_table(csv, {0.5}, [&](double r, double t) {
        return Mg1Model::at_load(r, laws.primary).wait_cdf(t, o.inversion);
    });
}

void fig13(CsvWriter& csv, const ReproduceOptions& o)
{
    const ReferenceLaws laws = reference_laws(o.fit);
    cdf_table(csv, {0.6, 0.7, 0.9}, [&](double r, double t) {
        return Mg1Model::at_load(r, laws.primary).wait_cdf(t, o.inversion);
    });
}

void fig14(CsvWriter& csv, const ReproduceOptions& o)
{
    const ReferenceLaws laws = reference_laws(o.fit);
    cdf_table(csv, {0.6, 0.7, 0.9}, [&](double r, double t) {
        return peered_wait_cdf(reference_scenario(laws, r, o.peering_cdf_policy, o.inversion), t);
    });
}

void fig15(CsvWriter& csv, const ReproduceOptions&)
{
    csv.header({"load", "redirection_ratio"});
    for (double r : load_grid())
        csv.row({r, redirection_ratio(r, 0.5)});
}

void fig16(CsvWriter& csv, const ReproduceOptions& o)
{
    const ReferenceLaws laws = reference_laws(o.fit);
    std::vector<std::string> head{"load"};
    for (auto k : kAllPolicies)
        for (const char* peer : {"peer1", "peer2"})
            head.push_back(std::string(to_string(k)) + "_" + peer);
    csv.header(head);
    for (double r : load_grid()) {
        std::vector<CsvCell> row{r};
        for (auto k : kAllPolicies) {
            const PeeringOutcome out = evaluate(reference_scenario(laws, r, k, o.inversion));
            for (const auto& s : out.per_peer_share)
                row.emplace_back(out.redirect_ratio * s.share);
        }
        csv.row(row);
    }
}

void fig17(CsvWriter& csv, const ReproduceOptions& o)
{
    const ReferenceLaws laws = reference_laws(o.fit);
    csv.header({"load", "no_peering", "ULB", "MLB", "PLB", "WLB"});
    for (double r : load_grid()) {
        std::vector<CsvCell> row{r, Mg1Model::at_load(r, laws.primary).expected_wait()};
        for (auto k : kAllPolicies)
            row.emplace_back(evaluate(reference_scenario(laws, r, k, o.inversion)).weighted_wait);
        csv.row(row);
    }
}

void fig18(CsvWriter& csv, const ReproduceOptions& o)
{
    const ReferenceLaws laws = reference_laws(o.fit);
    const std::vector<double> loads{0.55, 0.6, 0.7, 0.9};
    std::vector<std::string> head{"epsilon"};
    for (double r : loads)
        head.push_back(label("rho_", r));
    csv.header(head);
    for (double e : error_grid()) {
        std::vector<CsvCell> row{e};
        for (double r : loads)
            row.emplace_back(
                evaluate_with_error(reference_scenario(laws, r, PolicyKind::ULB, o.inversion), e)
                    .redirect_ratio);
        csv.row(row);
    }
}

void fig19(CsvWriter& csv, const ReproduceOptions& o)
{
    const ReferenceLaws laws = reference_laws(o.fit);
    csv.header({"epsilon", "ULB", "MLB", "PLB", "WLB"});
    for (double e : error_grid()) {
        std::vector<CsvCell> row{e};
        for (auto k : kAllPolicies)
            row.emplace_back(
                evaluate_with_error(reference_scenario(laws, o.error_sweep_load, k, o.inversion), e)
                    .weighted_wait);
        csv.row(row);
    }
}

void table6(CsvWriter& csv, const ReproduceOptions& o)
{
    const ReferenceLaws laws = reference_laws(o.fit);
    csv.header({"load", "ULB", "MLB", "PLB", "WLB"});
    for (double r : {0.6, 0.7, 0.9}) {
        std::vector<CsvCell> row{r};
        for (auto k : kAllPolicies)
            row.emplace_back(
                evaluate(reference_scenario(laws, r, k, o.inversion)).reduction_vs_no_peering);
        csv.row(row);
    }
}

using Target = void (*)(CsvWriter&, const ReproduceOptions&);

const std::map<std::string, Target>& target_table()
{
    static const std::map<std::string, Target> table = {
        {"fig10", fig10}, {"fig13", fig13}, {"fig14", fig14}, {"fig15", fig15}, {"fig16", fig16},
        {"fig17", fig17}, {"fig18", fig18}, {"fig19", fig19}, {"table6", table6},
    };
    return table;
}

} // namespace

ReferenceLaws reference_laws(const FitOptions& fit)
{
    const BoundedPareto primary(1.5, 1010.15, 1e10);
    const BoundedPareto peer2(2.0, 1500.23, 1e10);
    return ReferenceLaws{primary, peer2, fit_hyperexp(primary, fit), fit_hyperexp(peer2, fit)};
}

PeeringScenario reference_scenario(const ReferenceLaws& laws, double primary_load,
                                   PolicyKind policy, const InversionParams& inversion)
{
    const HyperExp& a = laws.primary;
    const HyperExp& b = laws.peer2;
    PeeringScenario sc{CdnNode{"primary", primary_load / a.mean(), a, 1.0, NodeRole::Primary},
                       {CdnNode{"peer1", 0.5 / a.mean(), a}, CdnNode{"peer2", 0.4 / b.mean(), b}},
                       RedirectionPolicy{policy, {0.4, 0.6}, 0.8},
                       0.5,
                       20000.0,
                       0.95,
                       ReductionBaseline::SameLoad,
                       inversion};
    return sc;
}

std::vector<double> cdf_time_grid()
{
    std::vector<double> g{0.0};
    for (int i = 0; i <= 24; ++i)
        g.push_back(std::pow(10.0, 2.0 + i / 4.0));
    g.push_back(20000.0);
    std::sort(g.begin(), g.end());
    return g;
}

const std::vector<std::string>& reproduce_targets()
{
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : target_table())
            v.push_back(k);
        return v;
    }();
    return names;
}

void reproduce(const std::string& target, std::ostream& out, const ReproduceOptions& opts)
{
    const auto& table = target_table();
    const auto it = table.find(target);
    if (it == table.end()) {
        std::string valid;
        for (const auto& n : reproduce_targets())
            valid += (valid.empty() ? "" : ", ") + n;
        throw DomainError("unknown reproduce target '" + target + "' (valid: " + valid + ")");
    }
    CsvWriter csv(out, opts.significant_digits);
    it->second(csv, opts);
}

} // namespace qpeer
