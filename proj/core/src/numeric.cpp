#include <ergoflow/errors.hpp>
#include <ergoflow/numeric.hpp>

#include <algorithm>
#include <numeric>

namespace ergoflow
{

std::string to_string(const BigRational &r)
{
    return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

BigRational parse_rational(const std::string &text)
{
    try {
        const auto slash = text.find('/');
        if (slash == std::string::npos)
            return BigRational(BigInt(text));
        BigInt num(text.substr(0, slash));
        BigInt den(text.substr(slash + 1));
        if (den == 0)
            throw InvalidArgument("zero denominator in '" + text + "'");
        return BigRational(num, den);
    } catch (const std::runtime_error &) {
        throw InvalidArgument("not a rational: '" + text + "'");
    }
}

BigRational exact_rational(double x)
{
    if (!std::isfinite(x))
        throw InvalidArgument("non-finite value has no rational form");
    if (x == 0.0)
        return BigRational(0);
    int exp = 0;
    const double mant = std::frexp(x, &exp); // x = mant * 2^exp, 0.5 <= |mant| < 1
    const auto m = static_cast<std::int64_t>(std::ldexp(mant, 53));
    exp -= 53;
    BigRational r(m);
    if (exp > 0)
        r *= BigRational(BigInt(1) << exp);
    else if (exp < 0)
        r /= BigRational(BigInt(1) << (-exp));
    return r;
}

std::size_t bit_length(const BigInt &v)
{
    if (v == 0)
        return 0;
    return boost::multiprecision::msb(boost::multiprecision::abs(v)) + 1;
}

double to_double(const BigRational &r)
{
    // Scale so the quotient carries 64 significant bits, then round once more.
    const BigInt &num = boost::multiprecision::numerator(r);
    const BigInt &den = boost::multiprecision::denominator(r);
    if (num == 0)
        return 0.0;
    const long shift = static_cast<long>(bit_length(den)) - static_cast<long>(bit_length(num)) + 64;
    BigInt scaled = shift >= 0 ? BigInt((abs(num) << shift) / den) : BigInt(abs(num) / (den << -shift));
    const double v = std::ldexp(scaled.convert_to<double>(), static_cast<int>(-shift));
    return num < 0 ? -v : v;
}

Fraction Fraction::make(std::int64_t num, std::int64_t den)
{
    if (den <= 0)
        throw InvalidArgument("circle point needs a positive denominator");
    num %= den;
    if (num < 0)
        num += den;
    const std::int64_t g = std::gcd(num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return {num, den};
}

Fraction Fraction::from_double(double x)
{
    if (!std::isfinite(x))
        throw InvalidArgument("non-finite circle coordinate");
    constexpr std::int64_t grid = std::int64_t{1} << 52;
    const double frac = x - std::floor(x);
    auto num = static_cast<std::int64_t>(std::llround(std::ldexp(frac, 52)));
    if (num >= grid)
        num -= grid;
    return make(num, grid);
}

double Fraction::scaled_phase(std::int64_t k) const
{
    i128 r = (static_cast<i128>(k) * num) % den;
    if (r < 0)
        r += den;
    return static_cast<double>(static_cast<std::int64_t>(r)) / static_cast<double>(den);
}

namespace
{

template <class T>
T pairwise(std::span<const T> terms)
{
    constexpr std::size_t leaf = 8;
    if (terms.size() <= leaf) {
        T acc{};
        for (const auto &t : terms)
            acc += t;
        return acc;
    }
    const std::size_t half = terms.size() / 2;
    return pairwise(terms.first(half)) + pairwise(terms.subspan(half));
}

} // namespace

double pairwise_sum(std::span<const double> terms) { return pairwise(terms); }

std::complex<double> pairwise_sum(std::span<const std::complex<double>> terms) { return pairwise(terms); }

double pairwise_error_bound(std::span<const double> terms)
{
    double abs_sum = 0.0;
    for (double t : terms)
        abs_sum += std::abs(t);
    const double levels = terms.size() <= 1 ? 1.0 : std::ceil(std::log2(static_cast<double>(terms.size()))) + 8.0;
    // The extra factor absorbs the rounding of abs_sum itself.
    return levels * kUnitRoundoff * abs_sum * (1.0 + 1e-12) + std::numeric_limits<double>::denorm_min();
}

} // namespace ergoflow
