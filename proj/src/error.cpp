#include "qpeer/error.hpp"

#include <cstdio>

namespace qpeer {

namespace {

std::string fmt_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

InstabilityError::InstabilityError(const std::string& node, double load)
    : std::runtime_error("unstable node '" + node + "': load " + fmt_double(load) + " >= 1"),
      node_(node), load_(load)
{
}

FitError::FitError(const std::string& what, double mean_rel_err, double second_rel_err,
                   double tail_rel_err)
    : std::runtime_error(what + " (mean rel err " + fmt_double(mean_rel_err) +
                         ", second-moment rel err " + fmt_double(second_rel_err) +
                         ", max tail rel err " + fmt_double(tail_rel_err) + ")"),
      mean_rel_err_(mean_rel_err), second_rel_err_(second_rel_err),
      tail_rel_err_(tail_rel_err)
{
}

InversionError::InversionError(const std::string& what, double t, double estimate,
                               double alternate)
    : std::runtime_error(what + " at t=" + fmt_double(t) + " (estimate " +
                         fmt_double(estimate) + ", alternate " + fmt_double(alternate) + ")"),
      t_(t), estimate_(estimate), alternate_(alternate)
{
}

ConvergenceError::ConvergenceError(const std::string& what, int iterations, double residual)
    : std::runtime_error(what + " after " + std::to_string(iterations) +
                         " iterations (residual " + fmt_double(residual) + ")"),
      iterations_(iterations), residual_(residual)
{
}

ProtocolError::ProtocolError(const std::string& state, const std::string& event)
    : std::logic_error("event '" + event + "' is not legal in state '" + state + "'"),
      state_(state), event_(event)
{
}

ConfigError::ConfigError(int line, const std::string& field, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) +
                         (field.empty() ? std::string() : ", field '" + field + "'") + ": " +
                         message),
      line_(line), field_(field)
{
}

} // namespace qpeer
