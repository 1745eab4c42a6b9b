#include "qpeer/diagnostics.hpp"

#include <cstdio>
#include <mutex>
#include <utility>

namespace qpeer {

namespace {

std::mutex& handler_mutex()
{
    static std::mutex m;
    return m;
}

WarningHandler& handler_slot()
{
    static WarningHandler h;
    return h;
}

} // namespace

WarningHandler set_warning_handler(WarningHandler handler)
{
    std::lock_guard lock(handler_mutex());
    return std::exchange(handler_slot(), std::move(handler));
}

void warn(std::string_view message)
{
    WarningHandler h;
    {
        std::lock_guard lock(handler_mutex());
        h = handler_slot();
    }
    if (h)
        h(message);
    else
        std::fprintf(stderr, "qpeer: warning: %.*s\n", static_cast<int>(message.size()),
                     message.data());
}

} // namespace qpeer
