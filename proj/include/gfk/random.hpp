/**
 * @file random.hpp
 * @brief Counter-based uniform stream keyed by (seed, path, draw index)
 *
 * Every draw is a pure function of its key, so any path can be regenerated
 * independently of how paths are distributed over workers.
 */

#ifndef GFK_RANDOM_HPP
#define GFK_RANDOM_HPP

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace gfk {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Uniform in the open interval (0, 1) for the key (seed, stream, counter).
constexpr double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) noexcept {
    const std::uint64_t key = mix64(seed ^ mix64(stream ^ 0x6a09e667f3bcc909ULL));
    const std::uint64_t bits = mix64(key ^ mix64(counter + 0x3c6ef372fe94f82bULL));
    // 53 high bits, shifted by half an ulp so 0 and 1 are never produced.
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

class StreamExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sequential view of one path's slice of the counter space.
class UniformStream {
public:
    UniformStream(std::uint64_t seed, std::uint64_t stream,
                  std::uint64_t capacity = std::numeric_limits<std::uint64_t>::max())
        : seed_(seed), stream_(stream), capacity_(capacity) {}

    double next() {
        if (counter_ >= capacity_) {
            throw StreamExhausted("UniformStream: exhausted after " + std::to_string(capacity_) + " draws");
        }
        return counter_uniform(seed_, stream_, counter_++);
    }

    std::uint64_t drawn() const noexcept { return counter_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t capacity_;
    std::uint64_t counter_ = 0;
};

}  // namespace gfk

#endif  // GFK_RANDOM_HPP
