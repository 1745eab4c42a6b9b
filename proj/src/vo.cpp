#include "qpeer/vo.hpp"

#include "qpeer/error.hpp"

#include <cmath>
#include <cstdio>

namespace qpeer {

namespace {

[[noreturn]] void illegal(VoState s, VoEventKind e)
{
    throw ProtocolError(to_string(s), to_string(e));
}

} // namespace

void ServiceRequirements::validate() const
{
    if (!(capacity > 0.0) || !(delay_threshold > 0.0) || !(duration > 0.0))
        throw DomainError("service requirements: capacity, delay threshold and duration must be "
                          "positive");
}

VoMachine VoMachine::step(const VoEvent& event) const
{
    VoMachine next = *this;
    const VoState s = state_;
    const VoEventKind e = event.kind;
    switch (s) {
    case VoState::Idle:
        if (e != VoEventKind::HotspotDetected)
            illegal(s, e);
        next.state_ = VoState::ShellVo;
        break;
    case VoState::ShellVo:
        if (e != VoEventKind::ShellCreated)
            illegal(s, e);
        if (!event.requirements)
            throw DomainError("ShellCreated needs service requirements");
        event.requirements->validate();
        next.requirements_ = event.requirements;
        next.state_ = VoState::Expanding;
        break;
    case VoState::Expanding:
        if (e == VoEventKind::PreexistingPolicyFound && long_term_) {
            next.state_ = VoState::Operational;
        } else if (e == VoEventKind::NegotiationSucceeded && !event.peers.empty()) {
            next.peers_ = event.peers;
            next.state_ = VoState::Operational;
        } else if (e == VoEventKind::NegotiationFailed) {
            next.state_ = VoState::ShellVo;
        } else {
            illegal(s, e);
        }
        break;
    case VoState::Operational:
        if (e != VoEventKind::TerminationConditionMet)
            illegal(s, e);
        switch (check_termination(event.conditions)) {
        case TerminationAction::Continue: break;
        case TerminationAction::Rearrange: next.state_ = VoState::Renegotiating; break;
        case TerminationAction::Disband: next.state_ = VoState::Terminated; break;
        }
        break;
    case VoState::Renegotiating:
        if (e == VoEventKind::NegotiationSucceeded && !event.peers.empty()) {
            next.peers_ = event.peers;
            next.state_ = VoState::Operational;
        } else if (e == VoEventKind::NegotiationFailed) {
            // Renegotiation resumes; only a successful round brings the VO back.
            next.state_ = VoState::Renegotiating;
        } else if (e == VoEventKind::TerminationConditionMet &&
                   check_termination(event.conditions) == TerminationAction::Disband) {
            next.state_ = VoState::Terminated;
        } else {
            illegal(s, e);
        }
        break;
    case VoState::Terminated:
        illegal(s, e);
    }
    next.history_.push_back(VoHistoryEntry{event.timestamp, s, event, next.state_});
    return next;
}

VoMachine VoMachine::replay() const
{
    VoMachine m(long_term_);
    for (const auto& h : history_)
        m = m.step(h.event);
    return m;
}

std::string VoMachine::export_history() const
{
    std::string out;
    char ts[64];
    for (const auto& h : history_) {
        std::snprintf(ts, sizeof ts, "%.17g", h.timestamp);
        out += ts;
        out += ',';
        out += to_string(h.before);
        out += ',';
        out += to_string(h.event.kind);
        out += ',';
        out += to_string(h.after);
        out += '\n';
    }
    return out;
}

bool detect_hotspot(double observed_response_time, double delay_threshold)
{
    if (!(observed_response_time > 0.0) || !(delay_threshold > 0.0))
        throw DomainError("detect_hotspot: response time and threshold must be positive");
    return observed_response_time > delay_threshold;
}

TerminationAction check_termination(const TerminationConditions& c) noexcept
{
    if (c.circumstances_lapsed || c.no_longer_beneficial || c.contributions_unmet)
        return TerminationAction::Disband;
    if (c.needs_expansion)
        return TerminationAction::Rearrange;
    return TerminationAction::Continue;
}

const char* to_string(VoState state) noexcept
{
    switch (state) {
    case VoState::Idle: return "Idle";
    case VoState::ShellVo: return "ShellVo";
    case VoState::Expanding: return "Expanding";
    case VoState::Operational: return "Operational";
    case VoState::Renegotiating: return "Renegotiating";
    case VoState::Terminated: return "Terminated";
    }
    return "?";
}

const char* to_string(VoEventKind kind) noexcept
{
    switch (kind) {
    case VoEventKind::HotspotDetected: return "HotspotDetected";
    case VoEventKind::ShellCreated: return "ShellCreated";
    case VoEventKind::PreexistingPolicyFound: return "PreexistingPolicyFound";
    case VoEventKind::NegotiationSucceeded: return "NegotiationSucceeded";
    case VoEventKind::NegotiationFailed: return "NegotiationFailed";
    case VoEventKind::TerminationConditionMet: return "TerminationConditionMet";
    }
    return "?";
}

std::optional<VoEventKind> parse_vo_event(const std::string& name)
{
    for (auto k : {VoEventKind::HotspotDetected, VoEventKind::ShellCreated,
                   VoEventKind::PreexistingPolicyFound, VoEventKind::NegotiationSucceeded,
                   VoEventKind::NegotiationFailed, VoEventKind::TerminationConditionMet}) {
        if (name == to_string(k))
            return k;
    }
    return std::nullopt;
}

} // namespace qpeer
