#ifndef ERGOFLOW_BIRKHOFF_HPP
#define ERGOFLOW_BIRKHOFF_HPP

#include <ergoflow/numeric.hpp>
#include <ergoflow/roofs.hpp>
#include <ergoflow/rotation.hpp>

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ergoflow
{

// A Birkhoff sum of the stored model. `radius` covers rounding and the orbit
// error of the working convergent; `truncation` bounds the effect of the modes
// the decay certificate allows beyond the cutoff.
struct BirkhoffValue {
    double value = 0.0;
    double radius = 0.0;
    double truncation = 0.0;

    [[nodiscard]] Enclosure model() const { return {value, radius}; }
    [[nodiscard]] Enclosure full() const { return {value, radius + truncation}; }
};

// S_n(f^(order))(x) by direct summation over the orbit; negative n uses
// S_n(x) = -S_{-n}(x + n alpha).
BirkhoffValue birkhoff_sum(const Roof &roof, const Rotation &rot, const Fraction &x, std::int64_t n, int order = 0);

// Same quantity through whichever route is cheapest: the Fourier closed form
// for analytic roofs, direct summation otherwise.
BirkhoffValue birkhoff_fast(const Roof &roof, const Rotation &rot, const Fraction &x, std::int64_t n, int order = 0);

struct KernelBound {
    std::string name;   // naive, below_qn, between_multiples, main_lower, main_argument
    std::size_t level;  // convergent index n the bound refers to
    double bound;
    double observed;
    bool holds;
};

struct XKernel {
    std::int64_t m = 0;
    std::int64_t k = 0;
    ComplexEnclosure value;
    std::vector<KernelBound> bounds;

    [[nodiscard]] bool all_hold() const;
};

// sum_{0 <= j < m} e(j k alpha) in closed form, without the bound checks.
ComplexEnclosure x_value(const Rotation &rot, std::int64_t m, std::int64_t k);
XKernel x_kernel(const Rotation &rot, std::int64_t m, std::int64_t k);

struct ModeContribution {
    std::int64_t k;
    double value; // 2 Re(c_k (2 pi i k)^order e(kx) X(m,k))
};

struct FourierBirkhoff {
    BirkhoffValue total;
    std::vector<ModeContribution> modes;
};

FourierBirkhoff birkhoff_via_fourier(const Roof &roof, const Rotation &rot, const Fraction &x, std::int64_t m,
                                     int order = 0);

struct DecompositionReport {
    std::int64_t m = 0;
    std::size_t n = 0;
    std::int64_t qn = 0;
    std::int64_t qn1 = 0;
    double tau = 0.0; // q_{n+1} / (4 q_n)
    Fraction x;
    std::array<Enclosure, 6> parts{}; // S1 .. S6 of S_m(f')(x)
    double s1_closed_form = 0.0;
    std::array<bool, 5> s1_dominates_each{}; // |S1| > |S_j|, j = 2..6
    bool s1_dominates = false;               // |S1| > sum_{j >= 2} |S_j|
    Enclosure total;
};

DecompositionReport derivative_decomposition(const Roof &roof, const Rotation &rot, const Fraction &x, std::int64_t m,
                                             std::size_t n);

// Closed arcs of the circle; hi may exceed 1 for an arc through 0.
struct CircleInterval {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] double length() const { return hi - lo; }
};

// {q x + phase} in [1/n, 1/2 - 1/n] or [1/2 + 1/n, 1 - 1/n]; empty for n <= 4.
std::vector<CircleInterval> i_n_intervals(std::int64_t q, double phase, std::size_t n);
std::vector<CircleInterval> i_n_set(const Roof &roof, const CFNumber &cf, std::size_t n);

// Number of roof crossings N(x, y, t): the n with S_n(x) <= y + t < S_{n+1}(x).
// When enclosures straddle the level the range [lo, hi] widens instead of guessing.
struct CrossingCount {
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    std::int64_t best = 0;
};

CrossingCount crossing_count(const Roof &roof, const Rotation &rot, const Fraction &x, double y, double t);

struct CrossingBounds {
    std::int64_t lower = 0; // min over the grid of the certain count
    std::int64_t upper = 0; // max over the grid of the possible count
    double t = 0.0;
    double t0 = 0.0;            // 4 max f
    bool window_applies = false; // t >= t0 on a validated roof
    bool window_holds = false;   // [lower, upper] inside [t/2, 2t]
    bool range_holds = false;    // inside [t/max f - 1, t/min f + 1]
};

CrossingBounds crossing_bounds(const Roof &roof, const Rotation &rot, const Fraction &a, const Fraction &b, double t,
                               std::size_t grid = 100);

struct StretchReport {
    double a = 0.0;
    double b = 0.0;
    double total_stretch = 0.0; // sup g - inf g over the samples
    double endpoint_stretch = 0.0; // |g(b) - g(a)|
    double epsilon = 0.0;
    double resolution = 0.0; // 2 / gridSize
    std::size_t monotone_segments = 0;
    std::size_t grid_size = 0;
};

inline constexpr std::size_t kStretchLevels = 32;

StretchReport stretch_report(const std::function<double(double)> &g, double a, double b, std::size_t grid_size = 4096);

struct DenjoyKoksma {
    double gap = 0.0;
    double radius = 0.0;
    double variation = 0.0;
    bool holds = false; // gap + radius < variation
};

DenjoyKoksma denjoy_koksma_gap(const Roof &roof, const Rotation &rot, const Fraction &x, std::size_t n);

struct Oscillation {
    double oscillation = 0.0;
    double radius = 0.0;
    double scale = 0.0; // max{1, |n| ||x - y||}
    double ratio = 0.0;
};

Oscillation c1_oscillation(const Roof &g, const Rotation &rot, const Fraction &x, const Fraction &y, std::int64_t n);

} // namespace ergoflow

#endif
