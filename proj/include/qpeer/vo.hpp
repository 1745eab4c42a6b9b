#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qpeer {

enum class VoState { Idle, ShellVo, Expanding, Operational, Renegotiating, Terminated };

enum class VoEventKind {
    HotspotDetected,
    ShellCreated,
    PreexistingPolicyFound,
    NegotiationSucceeded,
    NegotiationFailed,
    TerminationConditionMet,
};

struct ServiceRequirements {
    double capacity;         // work units per time unit
    double delay_threshold;  // time
    std::vector<std::string> preference;  // region or peer tags
    double duration;         // time

    void validate() const;
};

// The four reasons a running VO is reconsidered.
struct TerminationConditions {
    bool circumstances_lapsed = false;
    bool no_longer_beneficial = false;
    bool needs_expansion = false;
    bool contributions_unmet = false;
};

enum class TerminationAction { Continue, Rearrange, Disband };

struct VoEvent {
    VoEventKind kind;
    double timestamp = 0.0;
    std::optional<ServiceRequirements> requirements;  // ShellCreated
    std::vector<std::string> peers;                   // NegotiationSucceeded
    TerminationConditions conditions;                 // TerminationConditionMet
};

struct VoHistoryEntry {
    double timestamp;
    VoState before;
    VoEvent event;
    VoState after;
};

// Value-semantics lifecycle machine; step() returns the successor.
class VoMachine {
public:
    VoMachine() = default;
    // Long-term VOs may skip negotiation when a pre-existing policy is found.
    explicit VoMachine(bool long_term) : long_term_(long_term) {}

    VoState state() const noexcept { return state_; }
    bool long_term() const noexcept { return long_term_; }
    const std::optional<ServiceRequirements>& requirements() const noexcept { return requirements_; }
    const std::vector<std::string>& peers() const noexcept { return peers_; }
    const std::vector<VoHistoryEntry>& history() const noexcept { return history_; }

    // Throws ProtocolError for an illegal (state, event) pair.
    VoMachine step(const VoEvent& event) const;

    // Re-applies the history to a fresh machine.
    VoMachine replay() const;

    // timestamp,state-before,event,state-after per line.
    std::string export_history() const;

private:
    VoState state_ = VoState::Idle;
    bool long_term_ = false;
    std::optional<ServiceRequirements> requirements_;
    std::vector<std::string> peers_;
    std::vector<VoHistoryEntry> history_;
};

// Strict: equal to the threshold is not a hotspot.
bool detect_hotspot(double observed_response_time, double delay_threshold);

// Expansion alone asks for a rearrangement; any other condition disbands.
TerminationAction check_termination(const TerminationConditions& conditions) noexcept;

const char* to_string(VoState state) noexcept;
const char* to_string(VoEventKind kind) noexcept;
std::optional<VoEventKind> parse_vo_event(const std::string& name);

} // namespace qpeer
