#pragma once

// Signed two's-complement fixed point with a runtime Q(int_bits).(frac_bits)
// format. Raw values live in int64; products are formed in 128 bits and
// rounded to nearest, ties to even. Writing a value into a register of a
// given format saturates at the format's range and bumps a counter.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "dmm/errors.hpp"

namespace dmm {

using wide_int = __int128;

struct FixedPointFormat {
    int int_bits = 11;
    int frac_bits = 20;

    constexpr int total_bits() const noexcept { return 1 + int_bits + frac_bits; }
    constexpr std::int64_t max_raw() const noexcept {
        return static_cast<std::int64_t>((wide_int(1) << (int_bits + frac_bits)) - 1);
    }
    constexpr std::int64_t min_raw() const noexcept { return -max_raw() - 1; }
    constexpr std::int64_t one() const noexcept { return std::int64_t(1) << frac_bits; }
    double max_value() const noexcept { return std::ldexp(double(max_raw()), -frac_bits); }
    double min_value() const noexcept { return -std::ldexp(1.0, int_bits); }
    double ulp() const noexcept { return std::ldexp(1.0, -frac_bits); }

    void validate() const {
        if (frac_bits < 1) throw ConfigError("fixed-point format needs at least one fraction bit");
        if (int_bits < 0) throw ConfigError("fixed-point integer bits must be nonnegative");
        if (total_bits() > 64)
            throw ConfigError("fixed-point format Q" + std::to_string(int_bits) + "." +
                              std::to_string(frac_bits) + " needs more than 64 bits");
    }

    /// True if every value in [lo, hi] is representable without saturation.
    bool covers(double lo, double hi) const noexcept { return lo >= min_value() && hi <= max_value(); }

    friend constexpr bool operator==(const FixedPointFormat&, const FixedPointFormat&) = default;
};

/// Count of register writes that hit a format limit.
struct SaturationStats {
    std::uint64_t events = 0;
};

/// A raw fixed-point number tagged with its format.
struct Fixed {
    std::int64_t raw = 0;
    FixedPointFormat format;

    double to_double() const noexcept { return std::ldexp(double(raw), -format.frac_bits); }
};

/// Clamps `x` into the format range; counts an event if it had to.
inline std::int64_t saturate(wide_int x, const FixedPointFormat& f, SaturationStats* stats) {
    if (x > f.max_raw()) {
        if (stats) ++stats->events;
        return f.max_raw();
    }
    if (x < f.min_raw()) {
        if (stats) ++stats->events;
        return f.min_raw();
    }
    return static_cast<std::int64_t>(x);
}

/// x / 2^shift rounded to nearest, ties to even.
constexpr wide_int shift_round_even(wide_int x, int shift) noexcept {
    if (shift <= 0) return x << -shift;
    const wide_int floor_q = x >> shift;  // arithmetic shift: floor division
    const wide_int rem = x - (floor_q << shift);
    const wide_int half = wide_int(1) << (shift - 1);
    if (rem > half || (rem == half && (floor_q & 1))) return floor_q + 1;
    return floor_q;
}

/// Round-to-nearest-even quantization with saturation.
inline Fixed quantize(double x, const FixedPointFormat& f, SaturationStats* stats = nullptr) {
    const double scaled = std::ldexp(x, f.frac_bits);
    if (std::isnan(scaled)) throw DomainError("cannot quantize NaN");
    // Compare against the range before converting so huge inputs cannot overflow.
    if (scaled >= std::ldexp(1.0, f.int_bits + f.frac_bits)) {
        if (stats) ++stats->events;
        return {f.max_raw(), f};
    }
    if (scaled < -std::ldexp(1.0, f.int_bits + f.frac_bits)) {
        if (stats) ++stats->events;
        return {f.min_raw(), f};
    }
    const double ip = std::floor(scaled);
    const double frac = scaled - ip;
    wide_int r = static_cast<wide_int>(ip);
    if (frac > 0.5 || (frac == 0.5 && (r & 1))) ++r;
    return {saturate(r, f, stats), f};
}

/// Product of two raw values sharing `frac_bits`, still in 128 bits.
constexpr wide_int fx_mul(wide_int a, wide_int b, int frac_bits) noexcept {
    return shift_round_even(a * b, frac_bits);
}

} // namespace dmm
