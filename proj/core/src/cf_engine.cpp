#include <ergoflow/cf_engine.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ergoflow
{

namespace
{

using boost::multiprecision::denominator;
using boost::multiprecision::numerator;

BigInt floor_of(const BigRational &r)
{
    const BigInt &n = numerator(r);
    const BigInt &d = denominator(r);
    BigInt q = n / d;
    if (n < 0 && q * d != n)
        --q;
    return q;
}

BigRational dist_to_int(const BigRational &y)
{
    const BigRational f = y - BigRational(floor_of(y));
    const BigRational g = BigRational(1) - f;
    return f < g ? f : g;
}

RationalInterval hull_of(const BigInt &p, const BigInt &q, const BigInt &pp, const BigInt &qp)
{
    BigRational a(p, q);
    BigRational b(p + pp, q + qp);
    if (b < a)
        std::swap(a, b);
    return {a, b};
}

void require_count_below_depth(const CFNumber &cf, const BigInt &k, const char *what)
{
    if (cf.depth() == 0 || k >= cf.q(cf.depth()))
        throw InsufficientDepth(std::string(what) + " needs q_depth > " + k.str() + " but the prefix has q_" +
                                std::to_string(cf.depth()) + " = " + cf.q(cf.depth()).str());
}

// Smallest n with q_n > count; the residues k p_n mod q_n then order the orbit.
std::size_t ordering_depth(const CFNumber &cf, std::int64_t count)
{
    for (std::size_t n = 0; n <= cf.depth(); ++n)
        if (cf.q(n) > count)
            return n;
    return cf.depth();
}

bool fits_u64(const BigInt &v) { return v >= 0 && bit_length(v) <= 63; }

} // namespace

CFNumber::CFNumber(std::vector<BigInt> quotients, std::size_t int_budget_bits)
    : quotients_(std::move(quotients)), budget_(int_budget_bits)
{
    conv_.reserve(quotients_.size() + 1);
    conv_.push_back({BigInt(0), BigInt(1)});
    BigInt pm1 = 1, qm1 = 0;
    for (std::size_t i = 0; i < quotients_.size(); ++i) {
        const BigInt &a = quotients_[i];
        if (a < 1)
            throw InvalidCF("partial quotient a_" + std::to_string(i + 1) + " = " + a.str() + " is not positive");
        const Convergent &last = conv_.back();
        Convergent next{a * last.p + pm1, a * last.q + qm1};
        if (bit_length(next.q) > budget_)
            throw BudgetExceeded("q_" + std::to_string(i + 1) + " needs " + std::to_string(bit_length(next.q)) +
                                 " bits, budget is " + std::to_string(budget_));
        pm1 = last.p;
        qm1 = last.q;
        conv_.push_back(std::move(next));
    }
    const std::size_t n = quotients_.size();
    hull_ = hull_of(conv_[n].p, conv_[n].q, p_prev(n), q_prev(n));
}

CFNumber::CFNumber(std::initializer_list<std::uint64_t> quotients)
    : CFNumber(std::vector<BigInt>(quotients.begin(), quotients.end()))
{
}

const BigInt &CFNumber::quotient(std::size_t n) const
{
    if (n == 0 || n > quotients_.size())
        throw InvalidArgument("quotient index " + std::to_string(n) + " outside 1.." + std::to_string(depth()));
    return quotients_[n - 1];
}

CFNumber CFNumber::extended(std::span<const BigInt> more) const
{
    std::vector<BigInt> all = quotients_;
    all.insert(all.end(), more.begin(), more.end());
    return CFNumber(std::move(all), budget_);
}

CFNumber CFNumber::truncated(std::size_t d) const
{
    d = std::min(d, quotients_.size());
    return CFNumber(std::vector<BigInt>(quotients_.begin(), quotients_.begin() + static_cast<std::ptrdiff_t>(d)),
                    budget_);
}

std::vector<Convergent> convergents(const CFNumber &cf)
{
    if (cf.depth() == 0)
        throw InvalidCF("empty quotient sequence");
    return cf.convergent_table();
}

RationalInterval cylinder_interval(std::span<const BigInt> prefix)
{
    if (prefix.empty())
        throw InvalidCF("empty prefix");
    BigInt pm1 = 1, qm1 = 0;
    BigInt p = prefix[0], q = 1;
    for (std::size_t i = 1; i < prefix.size(); ++i) {
        if (prefix[i] < 1)
            throw InvalidCF("partial quotient c_" + std::to_string(i) + " is not positive");
        BigInt np = prefix[i] * p + pm1;
        BigInt nq = prefix[i] * q + qm1;
        pm1 = std::exchange(p, std::move(np));
        qm1 = std::exchange(q, std::move(nq));
    }
    return hull_of(p, q, pm1, qm1);
}

CircleEnclosure circle_distance(const CFNumber &cf, const BigInt &k)
{
    if (k < 1)
        throw InvalidArgument("circle_distance needs k >= 1");
    require_count_below_depth(cf, k, "circle_distance");
    const RationalInterval &h = cf.hull();
    const BigRational kk(k);
    BigRational lo = kk * h.lower;
    BigRational hi = kk * h.upper;
    const BigRational shift(floor_of(lo));
    lo -= shift;
    hi -= shift; // now 0 <= lo <= hi < lo + 1

    const BigRational dlo = dist_to_int(lo);
    const BigRational dhi = dist_to_int(hi);
    CircleEnclosure out{std::min(dlo, dhi), std::max(dlo, dhi)};
    const BigRational half(1, 2);
    for (const BigRational &b : {half, BigRational(1), BigRational(3, 2)}) {
        if (lo < b && b < hi) {
            if (b == BigRational(1))
                out.lower = 0;
            else
                out.upper = half;
        }
    }
    return out;
}

bool verify_sandwich(const CFNumber &cf, std::size_t n)
{
    if (n + 2 > cf.depth())
        throw InsufficientDepth("sandwich at n = " + std::to_string(n) + " needs depth >= " + std::to_string(n + 2));
    const CircleEnclosure d = circle_distance(cf, cf.q(n));
    const BigRational lower(BigInt(1), cf.q(n) + cf.q(n + 1));
    const BigRational upper(BigInt(1), cf.q(n + 1));
    if (d.lower >= lower && d.upper < upper)
        return true;
    if (d.upper < lower || d.lower >= upper)
        return false;
    throw InsufficientDepth("sandwich at n = " + std::to_string(n) + " is not decided by the prefix");
}

namespace
{

// ||k alpha|| compared against a reference index over the whole hull. When both
// distances are affine on the hull, comparing at the two endpoints decides the
// sign of the difference everywhere.
template <class Int>
struct HullEndpoints {
    Int p1, q1, p2, q2;
};

template <class Int>
struct EndpointDistance {
    Int d1, d2;      // numerators of ||k E_i|| over q_i
    bool affine;     // no half-integer breakpoint of ||k x|| inside the hull
};

template <class Int>
EndpointDistance<Int> endpoint_distance(const HullEndpoints<Int> &e, const Int &k)
{
    const Int r1 = (k * e.p1) % e.q1;
    const Int r2 = (k * e.p2) % e.q2;
    EndpointDistance<Int> out{std::min(r1, Int(e.q1 - r1)), std::min(r2, Int(e.q2 - r2)), true};
    // Next half-integer above 2 k E_1 lies below 2 k E_2?
    const Int h = (2 * k * e.p1) / e.q1 + 1;
    out.affine = !(h * e.q2 < 2 * k * e.p2);
    return out;
}

enum class Cmp { Holds, Violated, Undecided };

template <class Int>
Cmp compare_at_endpoints(const EndpointDistance<Int> &ref, const EndpointDistance<Int> &other)
{
    // Same denominator per endpoint, so numerators compare directly.
    const bool ok1 = !(other.d1 < ref.d1);
    const bool ok2 = !(other.d2 < ref.d2);
    if (ok1 && ok2)
        return Cmp::Holds;
    if (!ok1 && !ok2)
        return Cmp::Violated;
    return Cmp::Undecided;
}

Cmp compare_by_enclosure(const CFNumber &cf, const BigInt &ref, const BigInt &k)
{
    const CircleEnclosure a = circle_distance(cf, ref);
    const CircleEnclosure b = circle_distance(cf, k);
    if (b.lower >= a.upper)
        return Cmp::Holds;
    if (b.upper < a.lower)
        return Cmp::Violated;
    return Cmp::Undecided;
}

template <class Int>
void scan_best_approx(const CFNumber &cf, const HullEndpoints<Int> &e, std::uint64_t qn, std::uint64_t qref,
                      BestApproxResult &res)
{
    const EndpointDistance<Int> ref = endpoint_distance(e, Int(qref));
    for (std::uint64_t k = 1; k < qn; ++k) {
        if (k == qref)
            continue;
        const EndpointDistance<Int> other = endpoint_distance(e, Int(k));
        Cmp c = Cmp::Undecided;
        if (ref.affine && other.affine)
            c = compare_at_endpoints(ref, other);
        if (c == Cmp::Undecided)
            c = compare_by_enclosure(cf, BigInt(qref), BigInt(k));
        if (c == Cmp::Undecided)
            throw InsufficientDepth("best approximation at k = " + std::to_string(k) + " is not decided");
        if (c == Cmp::Violated) {
            res.holds = false;
            res.violations.push_back(k);
        }
    }
}

} // namespace

BestApproxResult best_approx_check(const CFNumber &cf, std::size_t n)
{
    if (n < 1 || n > cf.depth())
        throw InsufficientDepth("best approximation needs 1 <= n <= depth");
    if (cf.q(n) > kExhaustiveGuard)
        throw TooLargeForExhaustive("q_" + std::to_string(n) + " = " + cf.q(n).str() + " exceeds " +
                                    std::to_string(kExhaustiveGuard));
    const auto qn = cf.q(n).convert_to<std::uint64_t>();
    const auto qref = cf.q(n - 1).convert_to<std::uint64_t>();
    if (qn - 1 >= 1)
        require_count_below_depth(cf, BigInt(qn - 1), "best approximation");

    const RationalInterval &h = cf.hull();
    HullEndpoints<BigInt> big{numerator(h.lower), denominator(h.lower), numerator(h.upper), denominator(h.upper)};
    BestApproxResult res;
    // 2 k p fits 128 bits when the endpoint denominators stay under 2^100.
    if (bit_length(big.q1) <= 100 && bit_length(big.q2) <= 100) {
        auto to_u = [](const BigInt &v) { return static_cast<u128>(v.convert_to<std::uint64_t>()) |
                                                 (static_cast<u128>((v >> 64).convert_to<std::uint64_t>()) << 64); };
        HullEndpoints<u128> small{to_u(big.p1), to_u(big.q1), to_u(big.p2), to_u(big.q2)};
        scan_best_approx(cf, small, qn, qref, res);
    } else {
        scan_best_approx(cf, big, qn, qref, res);
    }
    return res;
}

OstrowskiDigits ostrowski(const CFNumber &cf, const BigInt &n)
{
    if (n < 1)
        throw InvalidCount("Ostrowski expansion needs N >= 1");
    require_count_below_depth(cf, n, "Ostrowski expansion");
    std::size_t top = 0;
    for (std::size_t i = 0; i <= cf.depth(); ++i)
        if (cf.q(i) <= n)
            top = i;
    OstrowskiDigits out;
    out.target = n;
    out.digits.assign(top + 1, BigInt(0));
    BigInt rem = n;
    for (std::size_t i = top + 1; i-- > 0;) {
        out.digits[i] = rem / cf.q(i);
        rem -= out.digits[i] * cf.q(i);
    }
    check_ostrowski(cf, out);
    return out;
}

void check_ostrowski(const CFNumber &cf, const OstrowskiDigits &d)
{
    BigInt sum = 0;
    for (std::size_t i = 0; i < d.digits.size(); ++i) {
        if (i >= cf.depth())
            throw InvalidCount("digit c_" + std::to_string(i) + " beyond the prefix");
        sum += d.digits[i] * cf.q(i);
        if (d.digits[i] < 0 || d.digits[i] > cf.quotient(i + 1))
            throw InvalidCount("digit c_" + std::to_string(i) + " outside 0..a_" + std::to_string(i + 1));
        if (i >= 1 && d.digits[i] == cf.quotient(i + 1) && d.digits[i - 1] != 0)
            throw InvalidCount("carry rule broken at c_" + std::to_string(i));
    }
    if (sum != d.target)
        throw InvalidCount("digits sum to " + sum.str() + ", expected " + d.target.str());
}

std::vector<std::int64_t> sorted_orbit(const CFNumber &cf, std::int64_t count)
{
    if (count < 1)
        throw InvalidCount("orbit needs at least one point");
    require_count_below_depth(cf, BigInt(count), "orbit ordering");
    const std::size_t n = ordering_depth(cf, count);
    std::vector<std::int64_t> ks(static_cast<std::size_t>(count));
    std::iota(ks.begin(), ks.end(), std::int64_t{1});
    if (fits_u64(cf.q(n))) {
        const auto p = static_cast<u128>(cf.p(n).convert_to<std::uint64_t>());
        const auto q = static_cast<u128>(cf.q(n).convert_to<std::uint64_t>());
        std::vector<std::pair<std::uint64_t, std::int64_t>> keyed;
        keyed.reserve(ks.size());
        for (std::int64_t k : ks)
            keyed.emplace_back(static_cast<std::uint64_t>((static_cast<u128>(k) * p) % q), k);
        std::sort(keyed.begin(), keyed.end());
        for (std::size_t i = 0; i < keyed.size(); ++i)
            ks[i] = keyed[i].second;
    } else {
        std::vector<std::pair<BigInt, std::int64_t>> keyed;
        keyed.reserve(ks.size());
        for (std::int64_t k : ks)
            keyed.emplace_back((BigInt(k) * cf.p(n)) % cf.q(n), k);
        std::sort(keyed.begin(), keyed.end(), [](const auto &a, const auto &b) { return a.first < b.first; });
        for (std::size_t i = 0; i < keyed.size(); ++i)
            ks[i] = keyed[i].second;
    }
    return ks;
}

RationalInterval fractional_multiple(const CFNumber &cf, std::int64_t d)
{
    if (d == 0)
        return {BigRational(0), BigRational(0)};
    const BigInt ad = d < 0 ? BigInt(-BigInt(d)) : BigInt(d);
    require_count_below_depth(cf, ad, "fractional part");
    const RationalInterval &h = cf.hull();
    BigRational lo = BigRational(d) * h.lower;
    BigRational hi = BigRational(d) * h.upper;
    if (hi < lo)
        std::swap(lo, hi);
    const BigRational shift(floor_of(lo));
    return {lo - shift, hi - shift};
}

KestenPartition kesten_partition(const CFNumber &cf, std::size_t m, std::int64_t count)
{
    if (count < 1)
        throw InvalidCount("Kesten partition needs N >= 1");
    require_count_below_depth(cf, BigInt(count), "Kesten partition");
    if (m < 1 || m >= cf.depth())
        throw InvalidCount("level m = " + std::to_string(m) + " outside 1.." + std::to_string(cf.depth() - 1));
    if (cf.q(m) == cf.q(m - 1))
        throw InvalidCount("level m = 1 is degenerate when a_1 = 1");
    if (!(cf.q(m) <= count && BigInt(count) < cf.q(m + 1)))
        throw InvalidCount("N = " + std::to_string(count) + " is not in [q_m, q_{m+1}) = [" + cf.q(m).str() + ", " +
                           cf.q(m + 1).str() + ")");

    const auto qm = cf.q(m).convert_to<std::int64_t>();
    const auto qm1 = cf.q(m - 1).convert_to<std::int64_t>();
    const std::int64_t sign = (m % 2 == 1) ? 1 : -1; // (-1)^{m-1}

    KestenPartition out;
    out.level = m;
    out.count = count;
    out.top_digit = count / qm;
    out.short_step = sign * qm1;
    out.long_step = -sign * (qm - qm1);
    out.unit_step = -sign * qm;

    std::vector<std::int64_t> order = sorted_orbit(cf, count);
    // Rotate so the circle walk starts at the first base point (k <= q_m).
    const auto first = std::find_if(order.begin(), order.end(), [qm](std::int64_t k) { return k <= qm; });
    std::rotate(order.begin(), first, order.end());

    const std::int64_t cm_qm = out.top_digit * qm;
    KestenInterval *cur = nullptr;
    auto close = [&](std::int64_t end_point) {
        cur->end_point = end_point;
        const std::int64_t last = cur->cuts.empty() ? cur->start_point : cur->cuts.back();
        cur->steps.push_back(end_point - last);
        const std::int64_t d = end_point - cur->start_point;
        if (d == out.short_step) {
            cur->length_class = GapClass::Short;
            ++out.short_count;
        } else if (d == out.long_step) {
            cur->length_class = GapClass::Long;
            ++out.long_count;
        } else {
            throw InvalidCount("gap index difference " + std::to_string(d) + " is neither short nor long");
        }
        cur->length = fractional_multiple(cf, d);
    };

    out.intervals.reserve(static_cast<std::size_t>(qm));
    for (std::int64_t k : order) {
        if (k <= qm) {
            if (cur)
                close(k);
            out.intervals.push_back({});
            cur = &out.intervals.back();
            cur->start_point = k;
        } else {
            const std::int64_t last = cur->cuts.empty() ? cur->start_point : cur->cuts.back();
            cur->steps.push_back(k - last);
            cur->cuts.push_back(k);
            if (k <= cm_qm)
                ++cur->middle_points;
            else
                ++cur->tail_points;
        }
    }
    close(out.intervals.front().start_point);
    return out;
}

bool legendre_check(const BigInt &p, const BigInt &q, const CFNumber &cf)
{
    if (q < 1)
        throw InvalidArgument("denominator must be positive");
    if (boost::multiprecision::gcd(p, q) != 1)
        throw InvalidArgument("p/q must be in lowest terms");
    const BigRational x(p, q);
    const BigRational threshold(BigInt(1), 2 * q * q);
    const RationalInterval &h = cf.hull();
    const BigRational a = abs(h.lower - x);
    const BigRational b = abs(h.upper - x);
    const BigRational upper = std::max(a, b);
    const BigRational lower = h.contains(x) ? BigRational(0) : std::min(a, b);
    if (lower >= threshold)
        return false;
    if (upper >= threshold)
        throw InsufficientDepth("the prefix does not decide |alpha - p/q| < 1/(2q^2)");
    for (std::size_t n = 0; n <= cf.depth(); ++n)
        if (cf.p(n) == p && cf.q(n) == q)
            return true;
    if (q > cf.q(cf.depth()))
        throw InsufficientDepth("p/q may be a convergent beyond the prefix");
    throw std::logic_error("Legendre bound met by a non-convergent " + to_string(x));
}

CFNumber extend_liouville(const CFNumber &cf, const GrowthSchedule &growth, std::size_t steps)
{
    std::vector<BigInt> quotients(cf.quotients().begin(), cf.quotients().end());
    BigInt q = cf.q(cf.depth());
    BigInt qp = cf.q_prev(cf.depth());
    for (std::size_t s = 0; s < steps; ++s) {
        const std::size_t n = quotients.size();
        const std::uint64_t e = growth(n);
        const std::size_t qbits = bit_length(q);
        // q^e has at most e * bits(q) bits; refuse before materializing it.
        const long double approx_bits = static_cast<long double>(e) * static_cast<long double>(qbits);
        if (approx_bits > static_cast<long double>(cf.int_budget_bits()) + 1) {
            const auto required = static_cast<std::uint64_t>(std::ceil(static_cast<double>(e) * log_big(q) / std::log(2.0)));
            if (required > cf.int_budget_bits())
                throw BudgetExceeded("q_" + std::to_string(n + 1) + " requires " + std::to_string(required) +
                                     " bits, budget is " + std::to_string(cf.int_budget_bits()));
        }
        const BigInt target = boost::multiprecision::pow(q, static_cast<unsigned>(e));
        BigInt a = target >= qp ? BigInt((target - qp) / q + 1) : BigInt(1);
        if (a < 1)
            a = 1;
        BigInt next = a * q + qp;
        if (bit_length(next) > cf.int_budget_bits())
            throw BudgetExceeded("q_" + std::to_string(n + 1) + " requires " + std::to_string(bit_length(next)) +
                                 " bits, budget is " + std::to_string(cf.int_budget_bits()));
        quotients.push_back(a);
        qp = std::exchange(q, std::move(next));
    }
    return CFNumber(std::move(quotients), cf.int_budget_bits());
}

double log_big(const BigInt &v)
{
    if (v <= 0)
        throw InvalidArgument("log of a non-positive integer");
    const std::size_t bits = bit_length(v);
    if (bits <= 1000)
        return std::log(v.convert_to<double>());
    const std::size_t shift = bits - 64;
    const BigInt top = v >> shift;
    return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

std::vector<double> liouville_scores(const CFNumber &cf)
{
    std::vector<double> out;
    for (std::size_t n = 1; n < cf.depth(); ++n) {
        if (cf.q(n) <= 1)
            continue;
        out.push_back(log_big(cf.q(n + 1)) / log_big(cf.q(n)));
    }
    return out;
}

} // namespace ergoflow
