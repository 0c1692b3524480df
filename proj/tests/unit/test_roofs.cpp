#include <ergoflow/fixtures.hpp>
#include <ergoflow/roofs.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ergoflow;

namespace
{

// Independent reference: long double cosine series of R1 written out directly.
long double r1_reference(long double x, int order, int cutoff = 20)
{
    const long double two_pi = 2.0L * 3.141592653589793238462643383279502884L;
    long double s = order == 0 ? 1.0L : 0.0L;
    long double c = 0.25L;
    for (int k = 1; k <= cutoff; ++k) {
        c *= 0.5L;
        const long double w = two_pi * k;
        switch (order) {
        case 0:
            s += 2.0L * c * std::cos(w * x);
            break;
        case 1:
            s -= 2.0L * c * w * std::sin(w * x);
            break;
        default:
            s -= 2.0L * c * w * w * std::cos(w * x);
        }
    }
    return s;
}

} // namespace

TEST(Eval, R1AtZeroIsOneAndAHalfMinusTail)
{
    const Roof r1 = fixtures::r1();
    const RoofValue v = r1.eval(0.0);
    const double tail = 0.5 * std::ldexp(1.0, -20); // 2 * sum_{k>20} 0.25 * 0.5^k
    EXPECT_NEAR(v.value, 1.5 - tail, 1e-15);
    EXPECT_NEAR(v.truncation, tail, 1e-18);
    EXPECT_DOUBLE_EQ(r1.mean(), 1.0);
}

TEST(Eval, R2IsAffine)
{
    const Roof r2 = fixtures::r2();
    EXPECT_DOUBLE_EQ(r2.eval(0.25).value, 0.75);
    EXPECT_DOUBLE_EQ(r2.eval(Fraction::make(1, 4)).value, 0.75);
    EXPECT_DOUBLE_EQ(r2.eval(0.25, 1).value, 1.0);
    EXPECT_DOUBLE_EQ(r2.mean(), 1.0);
    EXPECT_THROW((void)r2.eval(0.0, 1), DiscontinuityHit);
    EXPECT_THROW((void)r2.eval(Fraction{0, 1}, 2), DiscontinuityHit);
    EXPECT_NO_THROW((void)r2.eval(0.0, 0));
}

TEST(Eval, MatchesReferenceWithinReportedRadius)
{
    const Roof r1 = fixtures::r1();
    std::mt19937_64 rng(512);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 512; ++i) {
        const double x = u(rng);
        for (int order = 0; order <= 2; ++order) {
            const RoofValue v = r1.eval(x, order);
            const long double ref = r1_reference(x, order);
            EXPECT_LE(std::abs(static_cast<long double>(v.value) - ref), v.radius) << x << " order " << order;
        }
    }
}

TEST(Eval, CentralDifferences)
{
    const Roof r1 = fixtures::r1();
    // |f'''| <= sum 2|c_k| (2 pi k)^3.
    double f3 = 0.0;
    for (int k = 1; k <= 20; ++k)
        f3 += 2.0 * 0.25 * std::pow(0.5, k) * std::pow(kTwoPi * k, 3);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double h : {1e-4, 1e-5}) {
        for (int i = 0; i < 100; ++i) {
            const double x = u(rng);
            const double fd = (r1.value(x + h) - r1.value(x - h)) / (2 * h);
            const double bound = h * h / 6.0 * f3 + 4e-16 / h;
            EXPECT_NEAR(fd, r1.eval(x, 1).value, bound);
        }
    }
}

TEST(Validate, R1AndR2)
{
    const RoofCertificate c1 = fixtures::r1().validate();
    EXPECT_GE(c1.grid_min, 0.5 - c1.tail);
    EXPECT_LE(c1.upper_bound, 1.5 + c1.tail);
    EXPECT_EQ(c1.grid_points, kValidationGrid);
    // Minimum of R1 is at x = 1/2: 1 + 2 sum 0.25 (-0.5)^k.
    EXPECT_NEAR(c1.grid_min, 1.0 + 0.5 * (-1.0 / 3.0), 1e-6);

    const RoofCertificate c2 = fixtures::r2().validate();
    EXPECT_DOUBLE_EQ(c2.sawtooth_variation, 1.0);
    EXPECT_DOUBLE_EQ(c2.variation_bound, 1.0);
    EXPECT_GT(c2.lower_bound, 0.0);
}

TEST(Validate, RejectsBrokenNormalizationAndRange)
{
    EXPECT_THROW(Roof::analytic(TrigSeries::constant(2.0)).validate(), InvalidRoof);
    EXPECT_THROW(fixtures::single_mode(1, 0.4).validate(), InvalidRoof); // reaches 1.8
    EXPECT_NO_THROW(fixtures::single_mode(3, 0.2).validate());
    EXPECT_THROW(Roof::von_neumann(1.0, TrigSeries::constant(0.7)).validate(), InvalidRoof);
    EXPECT_THROW(Roof::von_neumann(0.0, TrigSeries::constant(1.0)), InvalidRoof);
}

TEST(GapSequence, R1FirstThree)
{
    const GapSequence g = gap_sequence(fixtures::r1(), 3);
    ASSERT_EQ(g.entries.size(), 3u);
    EXPECT_EQ(g.entries[0].index, 1);
    EXPECT_EQ(g.entries[1].index, 2);
    EXPECT_EQ(g.entries[2].index, 3);
    // T_1 = sum_{j>=2} 0.25 * 0.5^j * j = 0.375.
    EXPECT_NEAR(g.entries[0].weight, 0.375, 1e-15);
    EXPECT_NEAR(g.entries[0].ratio, 1.0 / 3.0, 1e-15);
    // T_2 = 0.5 * (x/(1-x)^2 - x) at x = 1/4.
    EXPECT_NEAR(g.entries[1].weight, 0.5 * (0.25 / 0.5625 - 0.25), 1e-15);
}

TEST(GapSequence, RatiosAgreeWithLongDoubleSummation)
{
    const GapSequence g = gap_sequence(fixtures::r1(), 10);
    for (std::size_t i = 0; i < g.entries.size(); ++i) {
        const long n = g.entries[i].index;
        long double t = 0.0L;
        for (long j = 2; j * n < 4000; ++j)
            t += 0.25L * std::pow(0.5L, static_cast<long double>(j * n)) * (j * n);
        const long double ratio = 0.25L * std::pow(0.5L, static_cast<long double>(n)) / t;
        EXPECT_NEAR(g.entries[i].ratio / static_cast<double>(ratio), 1.0, 1e-12);
        if (i > 0)
            EXPECT_GT(g.entries[i].ratio, g.entries[i - 1].ratio);
    }
}

TEST(GapSequence, SingleModeHasInfiniteRatio)
{
    const GapSequence g = gap_sequence(fixtures::single_mode(1, 0.1), 1);
    EXPECT_EQ(g.entries[0].index, 1);
    EXPECT_EQ(g.entries[0].weight, 0.0);
    EXPECT_TRUE(std::isinf(g.entries[0].ratio));
    EXPECT_THROW(gap_sequence(fixtures::single_mode(1, 0.1), 2), InsufficientModes);
    EXPECT_THROW(gap_sequence(fixtures::r2(), 1), UnsupportedRoof);
}
