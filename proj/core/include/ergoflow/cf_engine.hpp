#ifndef ERGOFLOW_CF_ENGINE_HPP
#define ERGOFLOW_CF_ENGINE_HPP

#include <ergoflow/errors.hpp>
#include <ergoflow/numeric.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace ergoflow
{

inline constexpr std::size_t kDefaultIntBudgetBits = 4096;

struct Convergent {
    BigInt p;
    BigInt q;
};

// Closed interval with exact rational endpoints, lower <= upper.
struct RationalInterval {
    BigRational lower;
    BigRational upper;

    [[nodiscard]] BigRational width() const { return upper - lower; }
    [[nodiscard]] bool contains(const BigRational &x) const { return lower <= x && x <= upper; }
};

// An irrational in (0, 1) known through the prefix [0; a_1, ..., a_N] of its
// continued fraction. Convergents p_n/q_n for 0 <= n <= N are cached; the
// value is only known to lie in the cylinder of the prefix.
class CFNumber
{
public:
    CFNumber() = default;
    explicit CFNumber(std::vector<BigInt> quotients, std::size_t int_budget_bits = kDefaultIntBudgetBits);
    CFNumber(std::initializer_list<std::uint64_t> quotients);

    [[nodiscard]] std::size_t depth() const { return quotients_.size(); }
    [[nodiscard]] std::size_t int_budget_bits() const { return budget_; }

    // a_n for 1 <= n <= depth().
    [[nodiscard]] const BigInt &quotient(std::size_t n) const;
    [[nodiscard]] std::span<const BigInt> quotients() const { return quotients_; }

    // p_n, q_n for 0 <= n <= depth(); index -1 is accepted through the
    // *_prev accessors (p_{-1} = 1, q_{-1} = 0).
    [[nodiscard]] const BigInt &p(std::size_t n) const { return conv_.at(n).p; }
    [[nodiscard]] const BigInt &q(std::size_t n) const { return conv_.at(n).q; }
    [[nodiscard]] BigInt p_prev(std::size_t n) const { return n == 0 ? BigInt(1) : conv_.at(n - 1).p; }
    [[nodiscard]] BigInt q_prev(std::size_t n) const { return n == 0 ? BigInt(0) : conv_.at(n - 1).q; }
    [[nodiscard]] const std::vector<Convergent> &convergent_table() const { return conv_; }

    // Closed hull of every real whose expansion starts with this prefix.
    [[nodiscard]] const RationalInterval &hull() const { return hull_; }

    [[nodiscard]] CFNumber extended(std::span<const BigInt> more) const;
    [[nodiscard]] CFNumber truncated(std::size_t depth) const;

    friend bool operator==(const CFNumber &a, const CFNumber &b) { return a.quotients_ == b.quotients_; }

private:
    std::vector<BigInt> quotients_;
    std::vector<Convergent> conv_;
    RationalInterval hull_;
    std::size_t budget_ = kDefaultIntBudgetBits;
};

std::vector<Convergent> convergents(const CFNumber &cf);

// Exact interval of all reals whose expansion starts with [c_0; c_1, ..., c_n].
RationalInterval cylinder_interval(std::span<const BigInt> prefix);

// Enclosure of ||k alpha|| (distance to the nearest integer) with rational ends.
struct CircleEnclosure {
    BigRational lower;
    BigRational upper;

    [[nodiscard]] BigRational width() const { return upper - lower; }
};

// Requires 1 <= k < q_depth; otherwise InsufficientDepth.
CircleEnclosure circle_distance(const CFNumber &cf, const BigInt &k);

// True iff 1/(q_n + q_{n+1}) <= ||q_n alpha|| < 1/q_{n+1}, decided exactly.
// Decidable for n <= depth - 2.
bool verify_sandwich(const CFNumber &cf, std::size_t n);

struct BestApproxResult {
    bool holds = true;
    std::vector<std::uint64_t> violations;
};

inline constexpr std::uint64_t kExhaustiveGuard = 1'000'000;

// Scans 1 <= k < q_n and checks ||q_{n-1} alpha|| <= ||k alpha||.
BestApproxResult best_approx_check(const CFNumber &cf, std::size_t n);

struct OstrowskiDigits {
    std::vector<BigInt> digits; // c_0 .. c_m
    BigInt target;

    [[nodiscard]] std::size_t top_index() const { return digits.empty() ? 0 : digits.size() - 1; }
};

OstrowskiDigits ostrowski(const CFNumber &cf, const BigInt &n);

// Throws InvalidCount when the digits break N = sum c_i q_i, the digit bound
// c_i <= a_{i+1}, or the carry rule.
void check_ostrowski(const CFNumber &cf, const OstrowskiDigits &digits);

enum class GapClass { Short, Long };

struct KestenInterval {
    std::int64_t start_point = 0; // k with P_r = {k alpha}
    std::int64_t end_point = 0;   // index of P_{r+1}
    GapClass length_class = GapClass::Short;
    RationalInterval length;
    std::vector<std::int64_t> cuts;  // interior points in circle order from P_r
    std::vector<std::int64_t> steps; // signed index difference across each sub-interval
    std::size_t middle_points = 0;   // cuts with q_m < k <= c_m q_m
    std::size_t tail_points = 0;     // cuts with c_m q_m < k <= N

    [[nodiscard]] std::size_t phi() const { return cuts.size() + 1; }
};

// Circle structure of {k alpha}, 1 <= k <= N, at level m where q_m <= N < q_{m+1}.
struct KestenPartition {
    std::size_t level = 0;
    std::int64_t count = 0;
    std::int64_t top_digit = 0; // c_m
    std::int64_t short_step = 0; // signed d with {d alpha} = ||q_{m-1} alpha||
    std::int64_t long_step = 0;  // signed d with {d alpha} = ||q_{m-1} alpha|| + ||q_m alpha||
    std::int64_t unit_step = 0;  // signed d with {d alpha} = ||q_m alpha||
    std::size_t short_count = 0;
    std::size_t long_count = 0;
    std::vector<KestenInterval> intervals;
};

KestenPartition kesten_partition(const CFNumber &cf, std::size_t level, std::int64_t count);

// Indices 1..count sorted by the circle position of {k alpha}. Exact for count < q_depth.
std::vector<std::int64_t> sorted_orbit(const CFNumber &cf, std::int64_t count);

// Enclosure of {d alpha} for a signed integer d with |d| < q_depth.
RationalInterval fractional_multiple(const CFNumber &cf, std::int64_t d);

// |alpha - p/q| < 1/(2 q^2), decided exactly; a true answer is asserted to be
// a convergent of the prefix.
bool legendre_check(const BigInt &p, const BigInt &q, const CFNumber &cf);

// Exponent e_n requested when extending from depth n.
using GrowthSchedule = std::function<std::uint64_t(std::size_t)>;

// Appends `steps` quotients, each the least a >= 1 with q_{n+1} > q_n^{e_n}.
CFNumber extend_liouville(const CFNumber &cf, const GrowthSchedule &growth, std::size_t steps);

// ln q_{n+1} / ln q_n for 1 <= n < depth (entries with q_n = 1 are skipped).
std::vector<double> liouville_scores(const CFNumber &cf);

// Natural logarithm of a positive big integer, valid far beyond double range.
double log_big(const BigInt &v);

} // namespace ergoflow

#endif
