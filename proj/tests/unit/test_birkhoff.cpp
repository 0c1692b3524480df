#include <ergoflow/birkhoff.hpp>
#include <ergoflow/fixtures.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <cmath>
#include <complex>
#include <random>

using namespace ergoflow;

namespace
{

constexpr long double kTwoPiL = 2.0L * 3.141592653589793238462643383279502884L;

long double to_ld(const BigRational &r)
{
    // 64 significant bits are plenty for a point in (0, 1).
    const BigInt scaled = boost::multiprecision::numerator(r) * (BigInt(1) << 80) / boost::multiprecision::denominator(r);
    return std::ldexp(static_cast<long double>(scaled.convert_to<long double>()), -80);
}

long double alpha_of(const CFNumber &cf)
{
    std::vector<BigInt> a;
    for (std::size_t n = 1; n <= cf.depth(); ++n)
        a.push_back(cf.quotient(n));
    return to_ld(oracle::witness(a));
}

long double frac_ld(long double x) { return x - std::floor(x); }

std::complex<long double> direct_x(long double alpha, std::int64_t m, std::int64_t k)
{
    std::complex<long double> s = 0;
    for (std::int64_t j = 0; j < m; ++j) {
        const long double t = kTwoPiL * frac_ld(static_cast<long double>(j * k) * alpha);
        s += std::complex<long double>(std::cos(t), std::sin(t));
    }
    return s;
}

long double r1_value(long double x)
{
    long double s = 1.0L, c = 0.25L;
    for (int k = 1; k <= 20; ++k) {
        c *= 0.5L;
        s += 2.0L * c * std::cos(kTwoPiL * frac_ld(k * x));
    }
    return s;
}

long double r1_sum(long double alpha, long double x, std::int64_t m)
{
    long double s = 0.0L;
    for (std::int64_t j = 0; j < m; ++j)
        s += r1_value(frac_ld(x + static_cast<long double>(j) * alpha));
    return s;
}

struct Fixture {
    const char *name;
    CFNumber cf;
};

std::vector<Fixture> both() { return {{"fibonacci", fixtures::fibonacci()}, {"beta", fixtures::beta()}}; }

} // namespace

TEST(Kernel, ClosedFormMatchesDirectSummation)
{
    for (const auto &fx : both()) {
        const Rotation rot(fx.cf);
        const long double alpha = alpha_of(fx.cf);
        for (std::int64_t m : {1, 2, 7, 9, 146, 1000, 10000}) {
            for (std::int64_t k : {1, 2, 3, 5, 8, 9, 13, 55, 89, 100}) {
                const ComplexEnclosure X = x_value(rot, m, k);
                const std::complex<long double> ref = direct_x(alpha, m, k);
                const long double diff = std::abs(std::complex<long double>(X.value.real(), X.value.imag()) - ref);
                EXPECT_LE(diff / std::max<long double>(1.0L, std::abs(ref)), 1e-9L) << fx.name << " m=" << m << " k=" << k;
            }
        }
    }
}

TEST(Kernel, TrivialCases)
{
    const Rotation rot(fixtures::fibonacci());
    EXPECT_EQ(x_value(rot, 0, 5).value, std::complex<double>(0.0));
    EXPECT_EQ(x_value(rot, 17, 0).value, std::complex<double>(17.0));
    // m = 1 is the single term e(0) = 1.
    EXPECT_NEAR(std::abs(x_value(rot, 1, 7).value - 1.0), 0.0, 1e-14);
}

TEST(Kernel, BoundsHoldAndMainTermsAppear)
{
    for (const auto &fx : both()) {
        const Rotation rot(fx.cf);
        std::size_t main_checks = 0;
        for (std::size_t n = 1; n + 1 <= 6; ++n) {
            const auto qn = fx.cf.q(n).convert_to<std::int64_t>();
            const auto qn1 = fx.cf.q(n + 1).convert_to<std::int64_t>();
            if (qn > 100)
                break;
            for (std::int64_t m = qn; 2 * m <= qn1 && m <= 10000; m += std::max<std::int64_t>(1, qn1 / 40)) {
                const XKernel kern = x_kernel(rot, m, qn);
                EXPECT_TRUE(kern.all_hold()) << fx.name << " m=" << m << " k=" << qn;
                for (const auto &b : kern.bounds)
                    main_checks += b.name == "main_lower" || b.name == "main_argument";
            }
        }
        for (std::int64_t k = 1; k <= 100; ++k)
            for (std::int64_t m : {3, 50, 777, 10000})
                EXPECT_TRUE(x_kernel(rot, m, k).all_hold()) << fx.name << " m=" << m << " k=" << k;
        EXPECT_GT(main_checks, 0u) << fx.name;
    }
}

TEST(Kernel, BetweenMultiplesOnBeta)
{
    // q = 1, 2, 9, 146: k = 20 sits between 2*9 and 3*9 with 4*2*9 < 146.
    const Rotation rot(fixtures::beta());
    const XKernel kern = x_kernel(rot, 5000, 20);
    bool found = false;
    for (const auto &b : kern.bounds)
        if (b.name == "between_multiples" && b.level == 2) {
            found = true;
            EXPECT_EQ(b.bound, 18.0);
            EXPECT_TRUE(b.holds);
        }
    EXPECT_TRUE(found);
}

TEST(Fourier, AgreesWithDirectAndLongDoubleReference)
{
    const Roof r1 = fixtures::r1();
    for (const auto &fx : both()) {
        const Rotation rot(fx.cf);
        const long double alpha = alpha_of(fx.cf);
        std::mt19937_64 rng(77);
        std::uniform_real_distribution<double> ux(0.0, 1.0);
        std::uniform_int_distribution<std::int64_t> um(1, 10000);
        for (int i = 0; i < 50; ++i) {
            const Fraction x = Fraction::from_double(ux(rng));
            const std::int64_t m = um(rng);
            const BirkhoffValue f = birkhoff_via_fourier(r1, rot, x, m).total;
            const BirkhoffValue d = birkhoff_sum(r1, rot, x, m);
            EXPECT_LE(std::abs(f.value - d.value), 1e-8 * static_cast<double>(m)) << fx.name << " m=" << m;
            EXPECT_LE(std::abs(f.value - d.value), f.radius + d.radius) << fx.name << " m=" << m;
            if (i < 10) {
                const long double ref = r1_sum(alpha, x.value(), m);
                EXPECT_LE(std::abs(static_cast<long double>(d.value) - ref), 1e-9L * m) << fx.name;
            }
        }
    }
}

TEST(Fourier, DerivativeOrders)
{
    const Roof r1 = fixtures::r1();
    const Rotation rot(fixtures::fibonacci());
    const Fraction x = Fraction::make(3, 17);
    for (int order = 1; order <= 2; ++order) {
        const BirkhoffValue f = birkhoff_via_fourier(r1, rot, x, 2000, order).total;
        const BirkhoffValue d = birkhoff_sum(r1, rot, x, 2000, order);
        EXPECT_LE(std::abs(f.value - d.value), f.radius + d.radius) << order;
    }
}

TEST(Sums, NegativeCocycle)
{
    // S_{-n}(x) = -S_n(x - n alpha): check S_{m+n} = S_m + S_n o R^m with m = -n.
    const Roof r1 = fixtures::r1();
    const Rotation rot(fixtures::fibonacci());
    const long double alpha = alpha_of(fixtures::fibonacci());
    const Fraction x = Fraction::make(1, 7);
    const BirkhoffValue neg = birkhoff_sum(r1, rot, x, -500);
    const long double ref = -r1_sum(alpha, frac_ld(x.value() - 500.0L * alpha), 500);
    EXPECT_NEAR(static_cast<double>(neg.value), static_cast<double>(ref), 1e-9);
    EXPECT_LE(std::abs(static_cast<long double>(neg.value) - ref), neg.radius + 1e-12L);
    const BirkhoffValue fneg = birkhoff_via_fourier(r1, rot, x, -500).total;
    EXPECT_LE(std::abs(fneg.value - neg.value), fneg.radius + neg.radius);
}

TEST(Sums, ConstantRoofIsExact)
{
    const Rotation rot(fixtures::fibonacci());
    const BirkhoffValue s = birkhoff_sum(Roof::constant_one(), rot, Fraction::make(1, 3), 12345);
    EXPECT_EQ(s.value, 12345.0);
    EXPECT_EQ(s.radius, 0.0);
}

TEST(Sums, RejectsOrbitsBeyondPrecision)
{
    const Rotation rot(fixtures::beta(3)); // q_3 = 146
    EXPECT_THROW(birkhoff_sum(fixtures::r1(), rot, Fraction::make(1, 2), 146), InsufficientDepth);
    EXPECT_NO_THROW(birkhoff_sum(fixtures::r1(), rot, Fraction::make(1, 2), 145));
}

TEST(Sums, VonNeumannJumpAtStart)
{
    const Rotation rot(fixtures::fibonacci());
    EXPECT_THROW(birkhoff_sum(fixtures::r2(), rot, Fraction{0, 1}, 10, 1), DiscontinuityHit);
    // Derivative of {x} + 1/2 away from the jump is 1.
    const BirkhoffValue d = birkhoff_sum(fixtures::r2(), rot, Fraction::make(1, 3), 10, 1);
    EXPECT_NEAR(d.value, 10.0, 1e-12);
}

TEST(Decomposition, PartsSumToDerivativeSum)
{
    const Roof r1 = fixtures::r1();
    const Rotation rot(fixtures::beta());
    for (std::int64_t m : {9, 40, 73}) {
        const Fraction x = Fraction::make(5, 23);
        const DecompositionReport rep = derivative_decomposition(r1, rot, x, m, 2);
        EXPECT_EQ(rep.qn, 9);
        EXPECT_EQ(rep.qn1, 146);
        const BirkhoffValue d = birkhoff_sum(r1, rot, x, m, 1);
        EXPECT_LE(std::abs(rep.total.value - d.value), rep.total.radius + d.radius + d.truncation + 1e-9);
        EXPECT_NEAR(std::abs(rep.parts[0].value), rep.s1_closed_form, 1e-12 * rep.s1_closed_form + 1e-15);
    }
    EXPECT_THROW(derivative_decomposition(r1, rot, Fraction::make(1, 2), 8, 2), RangeError);
    EXPECT_THROW(derivative_decomposition(r1, rot, Fraction::make(1, 2), 74, 2), RangeError);
}

TEST(Decomposition, SingleModeDominates)
{
    // Only k = q_n is present: S2 is the phase error of X, small for m = q_n.
    const Roof g = fixtures::single_mode(9, 0.2);
    const Rotation rot(fixtures::beta());
    const DecompositionReport rep = derivative_decomposition(g, rot, Fraction::make(1, 36), 9, 2);
    EXPECT_TRUE(rep.s1_dominates);
    for (std::size_t j = 2; j < 6; ++j)
        EXPECT_EQ(rep.parts[j].value, 0.0);
}

TEST(InSet, ExampleArcs)
{
    const auto arcs = i_n_intervals(1, 0.0, 8);
    ASSERT_EQ(arcs.size(), 2u);
    EXPECT_DOUBLE_EQ(arcs[0].lo, 0.125);
    EXPECT_DOUBLE_EQ(arcs[0].hi, 0.375);
    EXPECT_DOUBLE_EQ(arcs[1].lo, 0.625);
    EXPECT_DOUBLE_EQ(arcs[1].hi, 0.875);
    EXPECT_TRUE(i_n_intervals(5, 0.3, 4).empty());
}

TEST(InSet, MeasureProperty)
{
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<std::int64_t> uq(1, 200);
    std::uniform_int_distribution<std::size_t> un(5, 60);
    std::uniform_real_distribution<double> up(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const std::int64_t q = uq(rng);
        const std::size_t n = un(rng);
        const double phase = up(rng);
        const auto arcs = i_n_intervals(q, phase, n);
        ASSERT_EQ(arcs.size(), static_cast<std::size_t>(2 * q));
        double total = 0.0;
        for (const auto &a : arcs)
            total += a.length();
        EXPECT_NEAR(total, 1.0 - 4.0 / static_cast<double>(n), 1e-12);
        // Membership is checked on the arc midpoints against the defining condition.
        for (const auto &a : arcs) {
            const double mid = 0.5 * (a.lo + a.hi);
            double y = q * mid + phase;
            y -= std::floor(y);
            const double inv = 1.0 / static_cast<double>(n);
            const bool inside = (y >= inv && y <= 0.5 - inv) || (y >= 0.5 + inv && y <= 1.0 - inv);
            EXPECT_TRUE(inside);
        }
    }
}

TEST(InSet, NeedsTheMode)
{
    const CFNumber fib = fixtures::fibonacci();
    EXPECT_EQ(i_n_set(fixtures::r1(), fib, 5).size(), 2u * 8u); // q_5 = 8
    EXPECT_TRUE(i_n_set(fixtures::r1(), fib, 3).empty());
    EXPECT_THROW(i_n_set(fixtures::r1(), fib, 10), MissingMode); // q_10 = 89 > 20
}

TEST(Crossings, MatchLongDoubleWalk)
{
    const Roof r1 = fixtures::r1();
    const CFNumber fib = fixtures::fibonacci();
    const Rotation rot(fib);
    const long double alpha = alpha_of(fib);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double t : {0.3, 10.0, 100.0, 1000.0}) {
        for (int i = 0; i < 5; ++i) {
            const Fraction x = Fraction::from_double(u(rng));
            long double s = 0.0L;
            std::int64_t n = 0;
            while (true) {
                const long double next = s + r1_value(frac_ld(x.value() + n * alpha));
                if (next > t)
                    break;
                s = next;
                ++n;
            }
            const CrossingCount c = crossing_count(r1, rot, x, 0.0, t);
            EXPECT_LE(c.lo, n);
            EXPECT_GE(c.hi, n);
            EXPECT_EQ(c.best, n);
        }
    }
}

TEST(Crossings, VonNeumannWalkBothDirections)
{
    const Roof r2 = fixtures::r2();
    const Rotation rot(fixtures::fibonacci());
    const long double alpha = alpha_of(fixtures::fibonacci());
    const Fraction x = Fraction::make(2, 7);
    const CrossingCount up = crossing_count(r2, rot, x, 0.0, 50.0);
    long double s = 0.0L;
    std::int64_t n = 0;
    while (s + frac_ld(x.value() + n * alpha) + 0.5L <= 50.0L) {
        s += frac_ld(x.value() + n * alpha) + 0.5L;
        ++n;
    }
    EXPECT_EQ(up.best, n);
    const CrossingCount down = crossing_count(r2, rot, x, 0.0, -5.0);
    EXPECT_LT(down.best, 0);
    EXPECT_LE(down.lo, down.best);
    EXPECT_LE(down.best, down.hi);
}

TEST(Crossings, WindowOnValidatedRoof)
{
    const Roof r1 = fixtures::r1();
    const Rotation rot(fixtures::beta());
    for (double t : {10.0, 100.0, 1000.0}) {
        const CrossingBounds b = crossing_bounds(r1, rot, Fraction{0, 1}, Fraction::make(1, 1), t, 100);
        EXPECT_TRUE(b.window_applies);
        EXPECT_TRUE(b.window_holds) << t;
        EXPECT_TRUE(b.range_holds) << t;
        EXPECT_DOUBLE_EQ(b.t0, 4.0 * r1.max_value());
    }
}

TEST(Stretch, AffineMapIsUniform)
{
    const StretchReport r = stretch_report([](double x) { return 3.0 * x + 1.0; }, 0.0, 1.0);
    EXPECT_NEAR(r.total_stretch, 3.0, 1e-12);
    EXPECT_NEAR(r.endpoint_stretch, 3.0, 1e-12);
    EXPECT_LT(r.epsilon, 1e-9);
    EXPECT_EQ(r.monotone_segments, 1u);
    EXPECT_DOUBLE_EQ(r.resolution, 2.0 / 4096.0);
}

TEST(Stretch, NonlinearMapHasPositiveEpsilon)
{
    const StretchReport r = stretch_report([](double x) { return x * x; }, 0.0, 1.0);
    // Level sets of x^2: measure of {x : 0 <= x^2 <= 1/32} is sqrt(1/32), expected 1/32.
    EXPECT_GT(r.epsilon, 1.0);
    const StretchReport w = stretch_report([](double x) { return std::sin(6.0 * x); }, 0.0, 1.0);
    EXPECT_EQ(w.monotone_segments, 3u); // turns at pi/12 and pi/4
    EXPECT_THROW(stretch_report([](double) { return 1.0; }, 0.0, 1.0), DegenerateStretch);
}

TEST(DenjoyKoksma, VonNeumannFixture)
{
    const CFNumber fib = fixtures::fibonacci();
    const Rotation rot(fib);
    const long double alpha = alpha_of(fib);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t n = 1; n <= 8; ++n) {
        const Fraction x = Fraction::from_double(u(rng));
        const DenjoyKoksma dk = denjoy_koksma_gap(fixtures::r2(), rot, x, n);
        EXPECT_TRUE(dk.holds) << n;
        const auto qn = fib.q(n).convert_to<std::int64_t>();
        long double s = 0.0L;
        for (std::int64_t j = 0; j < qn; ++j)
            s += frac_ld(x.value() + j * alpha) + 0.5L;
        EXPECT_NEAR(dk.gap, static_cast<double>(std::abs(s - qn)), 1e-9);
    }
    const DenjoyKoksma one = denjoy_koksma_gap(Roof::constant_one(), rot, Fraction::make(1, 5), 6);
    EXPECT_EQ(one.gap, 0.0);
    EXPECT_TRUE(one.holds);
}

TEST(Oscillation, ScaledRatio)
{
    const Roof r1 = fixtures::r1();
    const Rotation rot(fixtures::fibonacci());
    const Fraction x = Fraction::make(1, 10);
    const Fraction y = Fraction::make(1, 10 + 1);
    const Oscillation o = c1_oscillation(r1, rot, x, y, 1000);
    const double sx = birkhoff_sum(r1, rot, x, 1000).value;
    const double sy = birkhoff_sum(r1, rot, y, 1000).value;
    EXPECT_NEAR(o.oscillation, std::abs(sx - sy), 1e-9);
    EXPECT_NEAR(o.scale, 1000.0 * (0.1 - 1.0 / 11.0), 1e-9);
    // |S_n f(x) - S_n f(y)| <= n Lip f ||x - y||.
    EXPECT_LE(o.ratio, r1.lipschitz() + 1e-9);
}
