#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace qpeer {

enum class StreamPurpose : std::uint64_t {
    Arrivals = 0x100,  // plus the class index
    Service = 0x200,
    Routing = 0x300,
};

// One independent random stream. Draws are built from raw 64-bit words so that the
// sequence is identical on every platform and standard library.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t key) : engine_(key) {}

    // Uniform on the open interval (0, 1).
    double uniform() noexcept
    {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }

private:
    std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream for (seed, node, purpose); distinct triples give unrelated streams.
inline RandomStream make_stream(std::uint64_t seed, std::uint64_t node, std::uint64_t purpose)
{
    return RandomStream(splitmix64(splitmix64(splitmix64(seed) ^ node) ^ purpose));
}

} // namespace qpeer
