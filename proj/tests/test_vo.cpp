#include "qpeer/error.hpp"
#include "qpeer/vo.hpp"

#include <doctest.h>

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

using namespace qpeer;

namespace {

const ServiceRequirements kReq{100.0, 20000.0, {"eu", "peer2"}, 3600.0};

VoEvent ev(VoEventKind k, double t = 0.0)
{
    VoEvent e{k, t, std::nullopt, {}, {}};
    if (k == VoEventKind::ShellCreated)
        e.requirements = kReq;
    if (k == VoEventKind::NegotiationSucceeded)
        e.peers = {"peer1"};
    return e;
}

VoEvent termination(bool a, bool b, bool c, bool d, double t = 0.0)
{
    VoEvent e = ev(VoEventKind::TerminationConditionMet, t);
    e.conditions = {a, b, c, d};
    return e;
}

// Event alphabet used for enumeration, with termination split by flag pattern.
std::vector<VoEvent> alphabet()
{
    std::vector<VoEvent> out;
    for (auto k : {VoEventKind::HotspotDetected, VoEventKind::ShellCreated,
                   VoEventKind::PreexistingPolicyFound, VoEventKind::NegotiationSucceeded,
                   VoEventKind::NegotiationFailed})
        out.push_back(ev(k));
    for (int mask = 0; mask < 16; ++mask)
        out.push_back(termination(mask & 1, mask & 2, mask & 4, mask & 8));
    return out;
}

VoMachine operational(bool long_term = false)
{
    return VoMachine(long_term)
        .step(ev(VoEventKind::HotspotDetected, 1))
        .step(ev(VoEventKind::ShellCreated, 2))
        .step(ev(VoEventKind::NegotiationSucceeded, 3));
}

} // namespace

TEST_CASE("hotspot detection")
{
    CHECK(detect_hotspot(25000, 20000));
    CHECK_FALSE(detect_hotspot(20000, 20000));
    CHECK_FALSE(detect_hotspot(100, 20000));
    CHECK_THROWS_AS(detect_hotspot(0, 20000), DomainError);
}

TEST_CASE("termination decision")
{
    CHECK(check_termination({false, false, false, false}) == TerminationAction::Continue);
    CHECK(check_termination({false, false, true, false}) == TerminationAction::Rearrange);
    CHECK(check_termination({true, false, false, false}) == TerminationAction::Disband);
    CHECK(check_termination({false, true, false, false}) == TerminationAction::Disband);
    CHECK(check_termination({false, false, false, true}) == TerminationAction::Disband);
    CHECK(check_termination({true, false, true, false}) == TerminationAction::Disband);
}

TEST_CASE("lifecycle examples")
{
    VoMachine m;
    CHECK(m.state() == VoState::Idle);
    m = m.step(ev(VoEventKind::HotspotDetected));
    CHECK(m.state() == VoState::ShellVo);
    m = m.step(ev(VoEventKind::ShellCreated));
    CHECK(m.state() == VoState::Expanding);
    REQUIRE(m.requirements());
    CHECK(m.requirements()->capacity == 100.0);
    const VoMachine before = m;
    m = m.step(ev(VoEventKind::NegotiationFailed));
    CHECK(m.state() == VoState::ShellVo);
    CHECK(before.state() == VoState::Expanding);
    m = m.step(ev(VoEventKind::ShellCreated)).step(ev(VoEventKind::NegotiationSucceeded));
    CHECK(m.state() == VoState::Operational);
    CHECK(m.peers() == std::vector<std::string>{"peer1"});
    CHECK(m.step(termination(false, false, false, false)).state() == VoState::Operational);
    CHECK(m.step(termination(false, false, true, false)).state() == VoState::Renegotiating);
    CHECK(m.step(termination(true, false, false, false)).state() == VoState::Terminated);
}

TEST_CASE("illegal events")
{
    VoMachine done = operational().step(termination(true, false, false, false));
    for (const auto& e : alphabet())
        CHECK_THROWS_AS(done.step(e), ProtocolError);
    try {
        VoMachine{}.step(ev(VoEventKind::ShellCreated));
        FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
        CHECK(e.state() == "Idle");
        CHECK(e.event() == "ShellCreated");
    }
    // Short-term VOs always negotiate.
    const VoMachine expanding = VoMachine(false).step(ev(VoEventKind::HotspotDetected))
                                    .step(ev(VoEventKind::ShellCreated));
    CHECK_THROWS_AS(expanding.step(ev(VoEventKind::PreexistingPolicyFound)), ProtocolError);
    CHECK(VoMachine(true).step(ev(VoEventKind::HotspotDetected)).step(ev(VoEventKind::ShellCreated))
              .step(ev(VoEventKind::PreexistingPolicyFound)).state() == VoState::Operational);
    VoEvent empty = ev(VoEventKind::NegotiationSucceeded);
    empty.peers.clear();
    CHECK_THROWS_AS(expanding.step(empty), ProtocolError);
    VoEvent bad = ev(VoEventKind::ShellCreated);
    bad.requirements->capacity = 0.0;
    CHECK_THROWS_AS(VoMachine{}.step(ev(VoEventKind::HotspotDetected)).step(bad), DomainError);
}

TEST_CASE("replay and export")
{
    VoMachine m = operational(true)
                      .step(termination(false, false, true, false, 4))
                      .step(ev(VoEventKind::NegotiationFailed, 5))
                      .step(ev(VoEventKind::NegotiationSucceeded, 6));
    const VoMachine r = m.replay();
    CHECK(r.state() == m.state());
    CHECK(r.peers() == m.peers());
    CHECK(r.long_term() == m.long_term());
    CHECK(r.export_history() == m.export_history());
    CHECK(m.history().size() == 6);
    CHECK(m.export_history() ==
          "1,Idle,HotspotDetected,ShellVo\n"
          "2,ShellVo,ShellCreated,Expanding\n"
          "3,Expanding,NegotiationSucceeded,Operational\n"
          "4,Operational,TerminationConditionMet,Renegotiating\n"
          "5,Renegotiating,NegotiationFailed,Renegotiating\n"
          "6,Renegotiating,NegotiationSucceeded,Operational\n");
}

TEST_CASE("event names round trip")
{
    for (const auto& e : alphabet())
        CHECK(parse_vo_event(to_string(e.kind)) == e.kind);
    CHECK_FALSE(parse_vo_event("Bogus").has_value());
}

TEST_CASE("exhaustive reachability and liveness")
{
    for (bool long_term : {false, true}) {
        // Breadth-first search over states reachable from Idle.
        std::map<VoState, VoMachine> seen{{VoState::Idle, VoMachine(long_term)}};
        std::vector<VoMachine> frontier{VoMachine(long_term)};
        std::map<VoState, std::set<VoState>> edges;
        while (!frontier.empty()) {
            std::vector<VoMachine> next;
            for (const auto& m : frontier) {
                for (const auto& e : alphabet()) {
                    VoMachine n;
                    try {
                        n = m.step(e);
                    } catch (const ProtocolError&) {
                        continue;
                    }
                    edges[m.state()].insert(n.state());
                    if (n.state() == VoState::Operational && m.state() != VoState::Operational)
                        CHECK((e.kind == VoEventKind::PreexistingPolicyFound ||
                               e.kind == VoEventKind::NegotiationSucceeded));
                    if (!seen.count(n.state())) {
                        seen.emplace(n.state(), n);
                        next.push_back(n);
                    }
                }
            }
            frontier = std::move(next);
        }
        CHECK(seen.size() == 6);
        // Every non-terminal state can reach Terminated.
        for (const auto& [s, m] : seen) {
            if (s == VoState::Terminated)
                continue;
            std::set<VoState> reach{s};
            std::vector<VoState> stack{s};
            while (!stack.empty()) {
                const VoState c = stack.back();
                stack.pop_back();
                for (VoState d : edges[c])
                    if (reach.insert(d).second)
                        stack.push_back(d);
            }
            CHECK_MESSAGE(reach.count(VoState::Terminated), to_string(s));
        }
    }
}

TEST_CASE("random walks replay exactly")
{
    const auto events = alphabet();
    std::uint64_t x = 12345;
    for (int walk = 0; walk < 200; ++walk) {
        VoMachine m(walk % 2 == 0);
        for (int i = 0; i < 40; ++i) {
            x = x * 6364136223846793005ULL + 1442695040888963407ULL;
            VoEvent e = events[(x >> 33) % events.size()];
            e.timestamp = i;
            try {
                m = m.step(e);
            } catch (const ProtocolError&) {
            }
        }
        CHECK(m.replay().state() == m.state());
        CHECK(m.replay().export_history() == m.export_history());
    }
}
