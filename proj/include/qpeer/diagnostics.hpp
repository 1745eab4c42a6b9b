#pragma once

#include <functional>
#include <string_view>

namespace qpeer {

using WarningHandler = std::function<void(std::string_view)>;

// Installs a process-wide sink for conditioning and clamping warnings; returns the
// previous one. An empty handler restores the default (stderr).
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

} // namespace qpeer
