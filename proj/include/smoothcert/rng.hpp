#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "smoothcert/tensor.hpp"

namespace smoothcert {

namespace detail {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based generator. Every draw is a pure function of
/// (base_seed, context, index, counter), so parallel consumers never share
/// mutable state and results are independent of scheduling.
struct Rng {
    std::uint64_t base_seed = 0;
    std::uint64_t context = 0;
    std::uint64_t index = 0;

    Rng with_context(std::uint64_t c) const { return Rng{base_seed, c, index}; }
    Rng with_index(std::uint64_t i) const { return Rng{base_seed, context, i}; }

    std::uint64_t word(std::uint64_t counter) const {
        std::uint64_t h = detail::mix64(base_seed ^ 0xA0761D6478BD642FULL);
        h = detail::mix64(h ^ context ^ 0xE7037ED1A0B428DBULL);
        h = detail::mix64(h ^ index ^ 0x8EBC6AF09C88C6E3ULL);
        return detail::mix64(h ^ counter);
    }

    /// Uniform in the open interval (0,1).
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(word(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller; draw k consumes counters 2k and 2k+1.
    double normal(std::uint64_t draw) const {
        double u1 = uniform(2 * draw);
        double u2 = uniform(2 * draw + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    void fill_normal(Tensor& t, std::uint64_t draw_base = 0) const {
        for (std::size_t i = 0; i < t.size(); ++i) {
            t[i] = normal(draw_base + i);
        }
    }

    Tensor gaussian(std::vector<std::size_t> shape, std::uint64_t draw_base = 0) const {
        Tensor t(std::move(shape));
        fill_normal(t, draw_base);
        return t;
    }
};

}  // namespace smoothcert
