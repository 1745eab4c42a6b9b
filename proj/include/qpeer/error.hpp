#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qpeer {

// Invalid argument or out-of-domain query.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A queue (or node) whose utilisation is at or above one.
class InstabilityError : public std::runtime_error {
public:
    InstabilityError(const std::string& node, double load);

    const std::string& node() const noexcept { return node_; }
    double load() const noexcept { return load_; }

private:
    std::string node_;
    double load_;
};

// Hyper-exponential fit that could not meet its moment/tail contract.
class FitError : public std::runtime_error {
public:
    FitError(const std::string& what, double mean_rel_err, double second_rel_err,
             double tail_rel_err);

    double mean_rel_err() const noexcept { return mean_rel_err_; }
    double second_rel_err() const noexcept { return second_rel_err_; }
    double tail_rel_err() const noexcept { return tail_rel_err_; }

private:
    double mean_rel_err_;
    double second_rel_err_;
    double tail_rel_err_;
};

// Laplace inversion whose accelerated series failed to settle.
class InversionError : public std::runtime_error {
public:
    InversionError(const std::string& what, double t, double estimate, double alternate);

    double t() const noexcept { return t_; }
    double estimate() const noexcept { return estimate_; }
    double alternate() const noexcept { return alternate_; }

private:
    double t_;
    double estimate_;
    double alternate_;
};

// Fixed-point iteration that hit its iteration cap.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, int iterations, double residual);

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

// Illegal (state, event) pair in the VO lifecycle machine.
class ProtocolError : public std::logic_error {
public:
    ProtocolError(const std::string& state, const std::string& event);

    const std::string& state() const noexcept { return state_; }
    const std::string& event() const noexcept { return event_; }

private:
    std::string state_;
    std::string event_;
};

// Scenario/config parse failure addressed by line and field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& field, const std::string& message);

    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

} // namespace qpeer
