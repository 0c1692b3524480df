#include <ergoflow/cf_engine.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <algorithm>
#include <set>

using namespace ergoflow;

namespace
{

std::vector<BigInt> big(std::initializer_list<int> xs) { return {xs.begin(), xs.end()}; }

CFNumber fibonacci(std::size_t depth) { return CFNumber(std::vector<BigInt>(depth, BigInt(1))); }

} // namespace

TEST(Convergents, FibonacciDenominators)
{
    const auto conv = convergents(fibonacci(6));
    std::vector<int> q;
    for (const auto &c : conv)
        q.push_back(c.q.convert_to<int>());
    EXPECT_EQ(q, (std::vector<int>{1, 1, 2, 3, 5, 8, 13}));
}

TEST(Convergents, BetaPrefixMatchesRecursionOracle)
{
    const auto a = big({2, 4, 16, 256});
    const auto expect = oracle::denominators(a);
    const CFNumber cf(a);
    ASSERT_EQ(expect.size(), 5u);
    for (std::size_t n = 0; n <= 4; ++n)
        EXPECT_EQ(cf.q(n), expect[n]);
    EXPECT_EQ(cf.q(4), BigInt(37385));
    EXPECT_EQ(cf.q(3), BigInt(146));
}

TEST(Convergents, SingleQuotient)
{
    const CFNumber cf{7};
    EXPECT_EQ(cf.q(1), BigInt(7));
    EXPECT_EQ(cf.p(1), BigInt(1));
}

TEST(Convergents, RejectsEmptyAndNonPositive)
{
    EXPECT_THROW(convergents(CFNumber{}), InvalidCF);
    EXPECT_THROW(CFNumber(big({1, 0, 2})), InvalidCF);
}

TEST(Convergents, BudgetIsEnforced)
{
    EXPECT_THROW(CFNumber(big({1000, 1000, 1000}), 20), BudgetExceeded);
}

TEST(Convergents, ValueOracleLiesInHull)
{
    const auto a = big({3, 1, 4, 1, 5, 9, 2, 6});
    const CFNumber cf(a);
    EXPECT_TRUE(cf.hull().contains(oracle::witness(a)));
    EXPECT_EQ(BigRational(cf.p(8), cf.q(8)), oracle::evaluate(a));
}

TEST(CircleDistance, FibonacciSandwichAtQ4)
{
    const CFNumber cf = fibonacci(12);
    const CircleEnclosure e = circle_distance(cf, BigInt(5));
    EXPECT_GE(e.lower, BigRational(1, 13));
    EXPECT_LT(e.upper, BigRational(1, 8));
}

TEST(CircleDistance, ContainsExactValueOnBetaPrefix)
{
    const auto a = big({2, 4, 16, 256});
    const CFNumber cf(a);
    const BigRational alpha = oracle::witness(a);
    const CircleEnclosure e = circle_distance(cf, BigInt(9));
    const BigRational exact = oracle::norm(BigRational(9) * alpha);
    EXPECT_LE(e.lower, exact);
    EXPECT_GE(e.upper, exact);
    // Width bounded by k times the hull width.
    EXPECT_LE(e.width(), BigRational(9) * cf.hull().width());
}

TEST(CircleDistance, RefusesBeyondPrefix)
{
    const CFNumber cf{2, 4, 16};
    EXPECT_THROW(circle_distance(cf, cf.q(3)), InsufficientDepth);
    EXPECT_NO_THROW(circle_distance(cf, cf.q(3) - 1));
}

TEST(BestApprox, FibonacciAndBetaPrefix)
{
    EXPECT_TRUE(best_approx_check(fibonacci(10), 5).holds);
    EXPECT_TRUE(best_approx_check(fibonacci(10), 1).holds);
    const auto r = best_approx_check(CFNumber{2, 4, 16, 256}, 3);
    EXPECT_TRUE(r.holds);
    EXPECT_TRUE(r.violations.empty());
}

TEST(BestApprox, AgreesWithExhaustiveScanOfWitness)
{
    const auto a = big({2, 4, 16, 256});
    const BigRational alpha = oracle::witness(a);
    const BigRational ref = oracle::norm(BigRational(9) * alpha);
    for (int k = 1; k < 146; ++k)
        if (k != 9)
            EXPECT_LE(ref, oracle::norm(BigRational(k) * alpha)) << k;
}

TEST(BestApprox, GuardAndDepth)
{
    const CFNumber cf{1000, 1000, 1000};
    EXPECT_THROW(best_approx_check(cf, 3), TooLargeForExhaustive);
    EXPECT_THROW(best_approx_check(CFNumber{2, 4, 16}, 4), InsufficientDepth);
}

TEST(Ostrowski, FibonacciTen)
{
    const auto d = ostrowski(fibonacci(8), BigInt(10));
    ASSERT_EQ(d.top_index(), 5u);
    std::vector<int> digits;
    for (const auto &c : d.digits)
        digits.push_back(c.convert_to<int>());
    EXPECT_EQ(digits, (std::vector<int>{0, 0, 1, 0, 0, 1}));
}

TEST(Ostrowski, ConvergentDenominatorIsSingleDigit)
{
    const CFNumber cf{2, 4, 16, 256};
    const auto d = ostrowski(cf, BigInt(146));
    for (std::size_t i = 0; i < d.digits.size(); ++i)
        EXPECT_EQ(d.digits[i], i == 3 ? 1 : 0);
}

TEST(Ostrowski, BetaHundredReconstructs)
{
    const CFNumber cf{2, 4, 16};
    const auto d = ostrowski(cf, BigInt(100));
    BigInt sum = 0;
    for (std::size_t i = 0; i < d.digits.size(); ++i) {
        sum += d.digits[i] * cf.q(i);
        EXPECT_LE(d.digits[i], cf.quotient(i + 1));
    }
    EXPECT_EQ(sum, 100);
    // Greedy oracle: 100 = 11*9 + 0*2 + 1*1.
    EXPECT_EQ(d.digits[2], 11);
    EXPECT_EQ(d.digits[0], 1);
}

TEST(Ostrowski, RejectsBrokenDigits)
{
    const CFNumber cf{2, 4, 16};
    OstrowskiDigits bad{{BigInt(1), BigInt(4)}, BigInt(9)};
    EXPECT_THROW(check_ostrowski(cf, bad), InvalidCount);
    EXPECT_THROW(ostrowski(cf, BigInt(146)), InsufficientDepth);
}

TEST(Kesten, FibonacciThreePoints)
{
    const CFNumber cf = fibonacci(10);
    const auto part = kesten_partition(cf, 3, 3);
    ASSERT_EQ(part.intervals.size(), 3u);
    std::set<std::string> lengths;
    for (const auto &iv : part.intervals)
        lengths.insert(to_string(iv.length.lower) + ":" + to_string(iv.length.upper));
    EXPECT_EQ(lengths.size(), 2u);
    EXPECT_EQ(part.short_count, 1u); // q_3 - q_2
    EXPECT_EQ(part.long_count, 2u);  // q_2
}

TEST(Kesten, BetaTwentyPoints)
{
    const auto part = kesten_partition(CFNumber{2, 4, 16}, 2, 20);
    EXPECT_EQ(part.short_count, 7u);
    EXPECT_EQ(part.long_count, 2u);
    EXPECT_EQ(part.top_digit, 2);
    for (const auto &iv : part.intervals) {
        EXPECT_TRUE(iv.phi() == 2 || iv.phi() == 3);
        EXPECT_EQ(iv.middle_points, 1u);
        EXPECT_LE(iv.tail_points, 1u);
    }
}

TEST(Kesten, NoSubdivisionWhenCountIsQm)
{
    const auto part = kesten_partition(CFNumber{2, 4, 16, 3}, 3, 146);
    for (const auto &iv : part.intervals)
        EXPECT_EQ(iv.phi(), 1u);
}

TEST(Kesten, MalformedCounts)
{
    const CFNumber cf{2, 4, 16};
    EXPECT_THROW(kesten_partition(cf, 2, 8), InvalidCount);
    EXPECT_THROW(kesten_partition(cf, 1, 20), InvalidCount);
    EXPECT_THROW(kesten_partition(cf, 2, 200), InsufficientDepth);
}

TEST(Legendre, Fibonacci)
{
    const CFNumber cf = fibonacci(20);
    EXPECT_TRUE(legendre_check(2, 3, cf));
    EXPECT_FALSE(legendre_check(3, 4, cf));
    for (std::size_t n = 1; n < 15; ++n)
        EXPECT_TRUE(legendre_check(cf.p(n), cf.q(n), cf)) << n;
}

TEST(Legendre, ConvergentCanMissTheBoundWhenNextQuotientIsOne)
{
    // [0; 5, 1, 50, ...] is about 0.1672, so the convergent 1/5 is ~0.033 away,
    // above 1/50.
    const CFNumber cf{5, 1, 50, 3};
    EXPECT_FALSE(legendre_check(1, 5, cf));
}

TEST(Cylinder, SmallPrefixes)
{
    const auto one = cylinder_interval(big({0, 1}));
    EXPECT_EQ(one.lower, BigRational(1, 2));
    EXPECT_EQ(one.upper, BigRational(1));
    const auto two = cylinder_interval(big({0, 2}));
    EXPECT_EQ(two.lower, BigRational(1, 3));
    EXPECT_EQ(two.upper, BigRational(1, 2));
    const auto oo = cylinder_interval(big({0, 1, 1}));
    EXPECT_EQ(oo.lower, BigRational(1, 2));
    EXPECT_EQ(oo.upper, BigRational(2, 3));
}

TEST(Cylinder, SampledExpansionsStayInside)
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        auto prefix = oracle::random_quotients(rng, 1 + trial % 6, 1, 9);
        auto full = prefix;
        auto tail = oracle::random_quotients(rng, 5, 1, 20);
        full.insert(full.end(), tail.begin(), tail.end());
        std::vector<BigInt> with_c0{BigInt(0)};
        with_c0.insert(with_c0.end(), prefix.begin(), prefix.end());
        EXPECT_TRUE(cylinder_interval(with_c0).contains(oracle::evaluate(full)));
    }
}

TEST(Liouville, GrowingExponents)
{
    const CFNumber ext = extend_liouville(CFNumber{2}, [](std::size_t n) { return n; }, 3);
    ASSERT_EQ(ext.depth(), 4u);
    for (std::size_t n = 1; n < 4; ++n)
        EXPECT_GT(ext.q(n + 1), boost::multiprecision::pow(ext.q(n), static_cast<unsigned>(n)));
}

TEST(Liouville, UnitExponentStillExtends)
{
    const CFNumber ext = extend_liouville(CFNumber{3, 3}, [](std::size_t) { return 1; }, 4);
    EXPECT_EQ(ext.depth(), 6u);
    for (std::size_t n = 2; n < 6; ++n)
        EXPECT_GT(ext.q(n + 1), ext.q(n));
}

TEST(Liouville, BudgetReportsRequiredBits)
{
    try {
        (void)extend_liouville(CFNumber(big({2, 4, 16}), 256), [](std::size_t) { return 1000; }, 1);
        FAIL() << "expected BudgetExceeded";
    } catch (const BudgetExceeded &e) {
        EXPECT_NE(std::string(e.what()).find("requires"), std::string::npos);
    }
}

TEST(Liouville, BetaScoresFromLogarithmOracle)
{
    // ln q_{n+1} / ln q_n for q = 2, 9, 146, 37385, 2450063506.
    const auto s = liouville_scores(CFNumber{2, 4, 16, 256, 65536});
    ASSERT_EQ(s.size(), 4u);
    const double q[] = {2.0, 9.0, 146.0, 37385.0, 2450063506.0};
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_NEAR(s[i], std::log(q[i + 1]) / std::log(q[i]), 1e-12);
    // The ratios fall toward 2 because q_{n+1} ~ q_n^2.
    EXPECT_GT(s[0], s[1]);
    EXPECT_GT(s[3], 2.0);
}

// Property sweeps over random prefixes.

TEST(Properties, DeterminantSandwichBestApprox)
{
    std::mt19937_64 rng(20240611);
    for (int trial = 0; trial < 1000; ++trial) {
        const CFNumber cf(oracle::random_quotients(rng, 30, 1, 10));
        for (std::size_t n = 1; n <= 30; ++n) {
            const BigInt det = cf.p(n) * cf.q(n - 1) - cf.p(n - 1) * cf.q(n);
            ASSERT_EQ(det, (n % 2 == 1) ? 1 : -1);
        }
        // At n = 0 the lower bound needs a_1 >= 2: with a_1 = 1, ||alpha|| < 1/2.
        for (std::size_t n = cf.q(1) == 1 ? 1 : 0; n <= 28; ++n)
            ASSERT_TRUE(verify_sandwich(cf, n)) << trial << " n=" << n;
        for (std::size_t n = 1; n <= 30 && cf.q(n) <= 10000; ++n)
            ASSERT_TRUE(best_approx_check(cf, n).holds) << trial << " n=" << n;
    }
}

TEST(Properties, ThreeGaps)
{
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 30; ++trial) {
        const auto a = oracle::random_quotients(rng, 14, 1, 6);
        const CFNumber cf(a);
        const BigRational alpha = oracle::witness(a);
        const std::int64_t n = std::min<std::int64_t>(2000, cf.q(14).convert_to<std::int64_t>() - 1);
        const auto order = sorted_orbit(cf, n);
        std::vector<BigRational> pts;
        for (auto k : order)
            pts.push_back(oracle::frac(BigRational(k) * alpha));
        ASSERT_TRUE(std::is_sorted(pts.begin(), pts.end()));
        std::set<BigRational> gaps;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            gaps.insert(pts[i + 1] - pts[i]);
        gaps.insert(pts.front() + 1 - pts.back());
        EXPECT_LE(gaps.size(), 3u);
    }
}

TEST(Properties, KestenCountsAndOstrowski)
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 60; ++trial) {
        const CFNumber cf(oracle::random_quotients(rng, 12, 1, 5));
        const auto cap = std::min<std::int64_t>(10000, cf.q(11).convert_to<std::int64_t>() - 1);
        std::uniform_int_distribution<std::int64_t> pick(1, cap);
        const std::int64_t n = pick(rng);
        const auto digits = ostrowski(cf, BigInt(n));
        const std::size_t m = digits.top_index();
        if (m == 1 && cf.q(1) == 1)
            continue;
        const auto part = kesten_partition(cf, m, n);
        EXPECT_EQ(part.short_count, (cf.q(m) - cf.q(m - 1)).convert_to<std::size_t>());
        EXPECT_EQ(part.long_count, cf.q(m - 1).convert_to<std::size_t>());
        EXPECT_EQ(part.top_digit, digits.digits[m]);
        for (const auto &iv : part.intervals) {
            EXPECT_GE(static_cast<std::int64_t>(iv.phi()), part.top_digit);
            EXPECT_LE(static_cast<std::int64_t>(iv.phi()), part.top_digit + 1);
        }
    }
}
