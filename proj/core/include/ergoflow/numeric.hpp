#ifndef ERGOFLOW_NUMERIC_HPP
#define ERGOFLOW_NUMERIC_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace ergoflow
{

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;
using u128 = unsigned __int128;
using i128 = __int128;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Unit roundoff of IEEE binary64.
inline constexpr double kUnitRoundoff = 0x1p-53;

// "p/q" decimal form used by every serialized rational.
std::string to_string(const BigRational &r);
BigRational parse_rational(const std::string &text);

// Exact value of a finite double as a rational.
BigRational exact_rational(double x);

std::size_t bit_length(const BigInt &v);

double to_double(const BigRational &r);

// A point of the circle R/Z given exactly as num/den with 0 <= num < den.
// Denominators stay below 2^62 so products with small integers fit in 128 bits.
struct Fraction {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Fraction make(std::int64_t num, std::int64_t den);
    // Dyadic rounding of x mod 1 onto the 2^-52 grid.
    static Fraction from_double(double x);

    [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    // {k * this} as a double; exact up to one rounding.
    [[nodiscard]] double scaled_phase(std::int64_t k) const;

    friend bool operator==(const Fraction &, const Fraction &) = default;
};

// A real number known to lie in [value - radius, value + radius].
struct Enclosure {
    double value = 0.0;
    double radius = 0.0;

    [[nodiscard]] double lower() const { return value - radius; }
    [[nodiscard]] double upper() const { return value + radius; }
    [[nodiscard]] bool contains(double x) const { return std::abs(x - value) <= radius; }
    [[nodiscard]] double width() const { return 2.0 * radius; }

    Enclosure &operator+=(const Enclosure &o)
    {
        value += o.value;
        radius += o.radius + kUnitRoundoff * std::abs(value);
        return *this;
    }
    friend Enclosure operator+(Enclosure a, const Enclosure &b) { return a += b; }
    friend Enclosure operator-(Enclosure a, const Enclosure &b)
    {
        a.value -= b.value;
        a.radius += b.radius + kUnitRoundoff * std::abs(a.value);
        return a;
    }
    friend Enclosure operator*(double s, const Enclosure &a)
    {
        const double v = s * a.value;
        return {v, std::abs(s) * a.radius + kUnitRoundoff * std::abs(v)};
    }
};

struct ComplexEnclosure {
    std::complex<double> value;
    double radius = 0.0;
};

// Pairwise summation with a fixed tree shape: the result depends only on the
// order of the input, never on how the terms were produced.
double pairwise_sum(std::span<const double> terms);
std::complex<double> pairwise_sum(std::span<const std::complex<double>> terms);

// A priori bound on the rounding error of pairwise_sum.
double pairwise_error_bound(std::span<const double> terms);

// Counter-based randomness: a pure function of (seed, stream, counter).
inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

class CounterRng
{
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : state_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL)))
    {
    }

    std::uint64_t next_u64()
    {
        state_ += 0x9e3779b97f4a7c15ULL;
        return splitmix64(state_);
    }
    // Uniform in [0, 1) on the 2^-53 grid.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1p-53; }

private:
    std::uint64_t state_;
};

} // namespace ergoflow

#endif
