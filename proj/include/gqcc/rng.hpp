#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>

namespace gqcc {

// SplitMix64 finaliser.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based random stream.
///
/// The n-th output is mix64(key + n * golden), so a stream is fully
/// determined by its key and position. Keys for substreams are derived by
/// hashing (parent key, index), which makes replicates independent of the
/// order in which they are executed.
class Stream {
public:
    using result_type = std::uint64_t;

    explicit Stream(std::uint64_t seed) noexcept : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

    Stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept : Stream(seed) {
        for (auto id : path) key_ = derive_key(key_, id);
    }

    [[nodiscard]] Stream substream(std::uint64_t id) const noexcept {
        Stream s(*this);
        s.key_ = derive_key(key_, id);
        s.counter_ = 0;
        s.has_spare_ = false;
        return s;
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix64(key_ + (++counter_) * kGolden); }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; deterministic across platforms.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

    static constexpr std::uint64_t derive_key(std::uint64_t parent, std::uint64_t id) noexcept {
        return mix64(parent ^ mix64(id + 0x3c6ef372fe94f82bULL));
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace gqcc
