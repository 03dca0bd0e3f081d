#pragma once

// Counter-based random numbers: every variate is a pure function of
// (seed, stream, counter), so results never depend on evaluation order or
// thread count.

#include <array>
#include <cstdint>

namespace mvsde {

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
[[nodiscard]] std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                                      std::array<std::uint32_t, 2> key) noexcept;

// splitmix64 finalizer; used to derive independent sub-seeds.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x) noexcept;

// Sub-seed for a tagged purpose and index, e.g. (master, kReplica, r).
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) noexcept;

// Standard normal quantile.
[[nodiscard]] double normal_quantile(double u);

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    // Two independent 64-bit words for (stream, counter).
    [[nodiscard]] std::array<std::uint64_t, 2> bits(std::uint64_t stream, std::uint64_t counter) const noexcept;

    // Uniform on the open interval (0, 1), 53 bits of resolution.
    [[nodiscard]] double uniform(std::uint64_t stream, std::uint64_t counter) const noexcept;

    // Standard normal by inversion of uniform(stream, counter).
    [[nodiscard]] double normal(std::uint64_t stream, std::uint64_t counter) const;

private:
    std::uint64_t seed_;
};

}  // namespace mvsde
