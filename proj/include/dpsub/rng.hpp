#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <string_view>

namespace dpsub {

// Counter-based random streams.
//
// Every random quantity in the library is drawn from a stream identified by
// (seed, purpose tag, index...). The stream key is
//
//     k0 = mix64(seed ^ fnv1a64(tag))
//     k_{i+1} = mix64(k_i + GOLDEN * (index_i + 1))
//
// and the j-th 64-bit output (j = 1, 2, ...) of a stream is
// mix64(key + j * GOLDEN), i.e. SplitMix64 started at the key. mix64 is the
// SplitMix64 finalizer. Uniforms take the top 53 bits and are centred in
// their bucket so they lie strictly inside (0, 1). Gaussians use the
// Box-Muller cosine/sine pair, Laplace uses the inverse CDF, and Gamma with
// integer shape is a sum of exponentials. These transforms are fixed so the
// streams can be reproduced outside C++.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::string_view tag,
                                   std::initializer_list<std::uint64_t> indices = {}) noexcept
{
    std::uint64_t k = mix64(seed ^ fnv1a64(tag));
    for (auto idx : indices) k = mix64(k + kGolden * (idx + 1));
    return k;
}

class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}
    CounterRng(std::uint64_t seed, std::string_view tag,
               std::initializer_list<std::uint64_t> indices = {}) noexcept
        : key_(stream_key(seed, tag, indices)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept { return mix64(key_ + (++counter_) * kGolden); }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept
    {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() noexcept
    {
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

    /// Laplace(0, scale): density exp(-|x|/scale) / (2 scale).
    double laplace(double scale) noexcept
    {
        const double u = uniform() - 0.5;
        const double mag = -std::log1p(-2.0 * std::abs(u));
        return u < 0 ? -scale * mag : scale * mag;
    }

    double exponential() noexcept { return -std::log(uniform()); }

    /// Gamma with integer shape and the given rate (mean shape / rate).
    double gamma_int(unsigned shape, double rate) noexcept
    {
        double acc = 0.0;
        for (unsigned i = 0; i < shape; ++i) acc += exponential();
        return acc / rate;
    }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace dpsub
