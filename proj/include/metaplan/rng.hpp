#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace metaplan {

/**
 * A reproducible random stream identified by (seed, stream id).
 *
 * The engine is a 64-bit Mersenne Twister initialised through std::seed_seq,
 * both of which the standard specifies bit-exactly, so identical ids give
 * identical draws on every platform. Substreams are derived by hashing a
 * child index into the stream id, which lets independent parts of a run
 * (tasks, batches, rows) draw without depending on each other's order.
 */
class RngStream {
public:
    using Engine = std::mt19937_64;

    RngStream(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) { reset(); }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    Engine& engine() noexcept { return engine_; }

    /// Restart the stream from its first draw.
    void reset() {
        std::seed_seq seq{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32),
                          static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
        engine_.seed(seq);
    }

    RngStream substream(std::uint64_t child) const { return RngStream(seed_, mix(stream_, child)); }

    RngStream substream(std::initializer_list<std::uint64_t> path) const {
        std::uint64_t id = stream_;
        for (auto child : path) id = mix(id, child);
        return RngStream(seed_, id);
    }

private:
    static std::uint64_t splitmix64(std::uint64_t x) noexcept {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static std::uint64_t mix(std::uint64_t parent, std::uint64_t child) noexcept {
        return splitmix64(splitmix64(parent) ^ (child + 0x632be59bd9b4e019ULL));
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    Engine engine_;
};

} // namespace metaplan
