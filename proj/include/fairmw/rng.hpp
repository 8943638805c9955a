#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace fairmw {

/// Independent random streams of one trial. Each gets its own seed from
/// derive_seed so that, e.g., the expert predictions of a trial do not depend
/// on which engine consumes them.
enum class RngStream : std::uint64_t {
    arrivals = 1,
    experts = 2,
    engine = 3,
    shuffle = 4,
    split = 5,
};

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Splittable seed derivation:
///   h = splitmix64(master); h = splitmix64(h ^ stream); h = splitmix64(h ^ index)
/// A trial's seeds depend only on (master, stream, trial index), so serial and
/// parallel execution see identical streams.
std::uint64_t derive_seed(std::uint64_t master, RngStream stream, std::uint64_t index) noexcept;

/// mt19937_64 with platform-independent draws (std distributions are not
/// specified bit-for-bit across standard libraries).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform integer in [0, n), unbiased (rejection sampling).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

/// Inverse-CDF draw over unnormalized nonnegative weights in index order.
/// `u` is a uniform draw on [0, 1).
std::size_t sample_index(std::span<const double> weights, double u);

}  // namespace fairmw
