#include <ergoflow/birkhoff.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ergoflow
{

namespace
{

constexpr double kPi = std::numbers::pi;
constexpr double u = kUnitRoundoff;

double derivative_bound(const Roof &roof, int order)
{
    // sup |f^(order + 1)| away from the jump, tails included.
    const TrigSeries &s = roof.series();
    switch (order) {
    case 0:
        return roof.lipschitz();
    case 1:
        return s.abs_sum(2) + s.tail_bound(2);
    default:
        return s.abs_sum(3) + s.tail_bound(3);
    }
}

bool is_constant(const Roof &roof) { return roof.is_analytic() && roof.series().support().empty(); }

BirkhoffValue constant_sum(const Roof &roof, std::int64_t n, int order)
{
    if (order > 0)
        return {};
    const double c = roof.series().mean();
    const double v = static_cast<double>(n) * c;
    const bool exact = c == std::floor(c) && std::abs(v) < 0x1p53;
    return {v, exact ? 0.0 : u * std::abs(v), 0.0};
}

std::int64_t to_i64(const BigInt &v)
{
    if (bit_length(v) > 62)
        return std::numeric_limits<std::int64_t>::max() / 4;
    return v.convert_to<std::int64_t>();
}

double circle_gap(double a, double b)
{
    double d = a - b;
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

} // namespace

BirkhoffValue birkhoff_sum(const Roof &roof, const Rotation &rot, const Fraction &x, std::int64_t n, int order)
{
    if (n == 0)
        return {};
    if (is_constant(roof))
        return constant_sum(roof, n, order);
    rot.require(n);
    const std::int64_t first = n > 0 ? 0 : n;
    const std::int64_t last = n > 0 ? n : 0; // exclusive
    const double lip = derivative_bound(roof, order);
    const bool jump = !roof.is_analytic();
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(last - first));
    double radius = 0.0;
    for (std::int64_t j = first; j < last; ++j) {
        if (jump && order >= 1 && j == 0 && x.num == 0)
            throw DiscontinuityHit("orbit starts on the jump");
        const double phi = rot.phase(x, j);
        const double err = rot.phase_error(j);
        const RoofValue v = roof.eval(phi, order);
        terms.push_back(v.value);
        radius += v.radius + lip * err;
        if (jump && order == 0 && (phi < err || phi > 1.0 - err))
            radius += std::abs(roof.slope());
    }
    BirkhoffValue out;
    out.value = pairwise_sum(terms);
    if (n < 0)
        out.value = -out.value;
    out.radius = (radius + pairwise_error_bound(terms)) * (1.0 + 4.0 * u);
    out.truncation = static_cast<double>(last - first) * roof.series().tail_bound(order);
    return out;
}

ComplexEnclosure x_value(const Rotation &rot, std::int64_t m, std::int64_t k)
{
    if (m == 0)
        return {0.0, 0.0};
    if (k == 0)
        return {static_cast<double>(m), 0.0};
    rot.require(m, k);
    rot.require(1, k);
    const double phi = rot.rotation_phase(1, k);
    const double psi = rot.rotation_phase(m, k);
    const double e1 = rot.phase_error(1, k);
    const double e2 = rot.phase_error(m, k);
    const double s = std::sin(kPi * phi);
    const double s_low = s - kPi * e1;
    if (!(s_low > 0.0))
        throw InsufficientDepth("frequency " + std::to_string(k) + " too close to a multiple of the working convergent");
    const double mag = std::sin(kPi * psi) / s;
    const std::complex<double> value = std::polar(1.0, kPi * (psi - phi)) * mag;
    const double radius =
        kPi * e2 / s_low + kPi * e1 / (s_low * s_low) + 8.0 * u * (std::abs(mag) + 1.0 / s);
    return {value, radius};
}

bool XKernel::all_hold() const
{
    return std::all_of(bounds.begin(), bounds.end(), [](const KernelBound &b) { return b.holds; });
}

XKernel x_kernel(const Rotation &rot, std::int64_t m, std::int64_t k)
{
    XKernel out;
    out.m = m;
    out.k = k;
    out.value = x_value(rot, m, k);
    const double mag = std::abs(out.value.value);
    const double r = out.value.radius;
    const auto am = static_cast<double>(m < 0 ? -m : m);
    const std::int64_t ak = k < 0 ? -k : k;
    out.bounds.push_back({"naive", 0, am, mag, mag - r <= am});

    const CFNumber &cf = rot.cf();
    const std::size_t depth = cf.depth();
    if (ak == 0)
        return out;
    for (std::size_t n = 0; n <= depth; ++n) {
        const std::int64_t qn = to_i64(cf.q(n));
        if (qn > ak) {
            out.bounds.push_back({"below_qn", n, static_cast<double>(qn), mag, mag - r <= static_cast<double>(qn)});
            break;
        }
    }
    for (std::size_t n = 1; n + 1 <= depth; ++n) {
        const std::int64_t qn = to_i64(cf.q(n));
        const std::int64_t qn1 = to_i64(cf.q(n + 1));
        if (qn > ak)
            break;
        const std::int64_t j = ak / qn;
        if (j >= 1 && ak % qn != 0 && 4 * static_cast<double>(j) * static_cast<double>(qn) < static_cast<double>(qn1))
            out.bounds.push_back(
                {"between_multiples", n, 2.0 * static_cast<double>(qn), mag, mag - r <= 2.0 * static_cast<double>(qn)});
    }
    if (m > 0) {
        for (std::size_t n = 0; n + 1 <= depth; ++n) {
            const std::int64_t qn = to_i64(cf.q(n));
            const std::int64_t qn1 = to_i64(cf.q(n + 1));
            if (qn != ak || m < qn || 2 * static_cast<double>(m) > static_cast<double>(qn1))
                continue;
            const double lower = 2.0 / kPi * am;
            out.bounds.push_back({"main_lower", n, lower, mag, mag + r >= lower});
            const double arg = std::abs(std::arg(out.value.value));
            const double arg_bound = kPi * am / static_cast<double>(qn1);
            const double arg_slack = mag > r ? std::asin(std::min(1.0, r / mag)) : kPi;
            out.bounds.push_back({"main_argument", n, arg_bound, arg, arg - arg_slack <= arg_bound});
        }
    }
    return out;
}

FourierBirkhoff birkhoff_via_fourier(const Roof &roof, const Rotation &rot, const Fraction &x, std::int64_t m,
                                     int order)
{
    if (!roof.is_analytic())
        throw UnsupportedRoof("Fourier route needs an analytic roof");
    FourierBirkhoff out;
    if (m == 0)
        return out;
    if (is_constant(roof)) {
        out.total = constant_sum(roof, m, order);
        return out;
    }
    const TrigSeries &s = roof.series();
    std::vector<double> terms;
    terms.reserve(s.support().size() + 1);
    double radius = 0.0;
    if (order == 0) {
        const double v = static_cast<double>(m) * s.mean();
        terms.push_back(v);
        radius += u * std::abs(v);
    }
    for (const std::size_t kk : s.support()) {
        const auto k = static_cast<std::int64_t>(kk);
        const ComplexEnclosure X = x_value(rot, m, k);
        const double w = kTwoPi * static_cast<double>(k);
        std::complex<double> c = s.coefficient(k);
        for (int i = 0; i < order; ++i)
            c *= std::complex<double>(0.0, w);
        const double theta = kTwoPi * x.scaled_phase(k);
        const std::complex<double> z = c * std::complex<double>(std::cos(theta), std::sin(theta)) * X.value;
        const double contribution = 2.0 * z.real();
        terms.push_back(contribution);
        out.modes.push_back({k, contribution});
        const double ac = std::abs(c);
        radius += 2.0 * ac * (X.radius + std::abs(X.value) * (2.0 * kTwoPi * u + 8.0 * u));
    }
    out.total.value = pairwise_sum(terms);
    out.total.radius = (radius + pairwise_error_bound(terms)) * (1.0 + 4.0 * u);
    out.total.truncation = std::abs(static_cast<double>(m)) * s.tail_bound(order);
    return out;
}

BirkhoffValue birkhoff_fast(const Roof &roof, const Rotation &rot, const Fraction &x, std::int64_t n, int order)
{
    if (n == 0)
        return {};
    if (is_constant(roof))
        return constant_sum(roof, n, order);
    // Short orbits go term by term, which also keeps S_1 bit-equal to f(x).
    if (roof.is_analytic() && (n > 32 || n < -32)) {
        const auto kmax = static_cast<double>(roof.series().support().back());
        if (std::abs(static_cast<double>(n)) * kmax < static_cast<double>(rot.q()) * 0.5)
            return birkhoff_via_fourier(roof, rot, x, n, order).total;
    }
    return birkhoff_sum(roof, rot, x, n, order);
}

DecompositionReport derivative_decomposition(const Roof &roof, const Rotation &rot, const Fraction &x, std::int64_t m,
                                             std::size_t n)
{
    if (!roof.is_analytic())
        throw UnsupportedRoof("decomposition needs an analytic roof");
    const CFNumber &cf = rot.cf();
    if (n + 1 > cf.depth())
        throw InsufficientDepth("decomposition at level " + std::to_string(n) + " needs q_{n+1}");
    DecompositionReport rep;
    rep.m = m;
    rep.n = n;
    rep.x = x;
    rep.qn = to_i64(cf.q(n));
    rep.qn1 = to_i64(cf.q(n + 1));
    rep.tau = static_cast<double>(rep.qn1) / (4.0 * static_cast<double>(rep.qn));
    if (m < rep.qn || 2 * m > rep.qn1)
        throw RangeError("m = " + std::to_string(m) + " outside [q_n, q_{n+1}/2] = [" + std::to_string(rep.qn) + ", " +
                         std::to_string(rep.qn1 / 2) + "]");

    const TrigSeries &s = roof.series();
    std::array<std::vector<double>, 6> vals;
    std::array<double, 6> rad{};
    for (const std::size_t kk : s.support()) {
        const auto k = static_cast<std::int64_t>(kk);
        const ComplexEnclosure X = x_value(rot, m, k);
        const std::complex<double> c = s.coefficient(k);
        const double theta = kTwoPi * x.scaled_phase(k);
        const std::complex<double> z = c * std::complex<double>(std::cos(theta), std::sin(theta));
        const double w = 4.0 * std::numbers::pi * static_cast<double>(k);
        const double base_rad = w * std::abs(c) * (X.radius + 16.0 * u * std::abs(X.value));
        if (k == rep.qn) {
            const double ax = std::abs(X.value);
            vals[0].push_back(-w * z.imag() * ax);
            rad[0] += base_rad;
            vals[1].push_back(-w * (z * (X.value - ax)).imag());
            rad[1] += 2.0 * base_rad;
            rep.s1_closed_form = 2.0 * std::numbers::pi * static_cast<double>(rep.qn) * 2.0 * std::abs(z.imag()) * ax;
            continue;
        }
        const double t = -w * (z * X.value).imag();
        std::size_t slot;
        if (k < rep.qn)
            slot = 2;
        else if (4 * static_cast<double>(k) <= static_cast<double>(rep.qn1))
            slot = (k % rep.qn == 0) ? 5 : 3;
        else
            slot = 4;
        vals[slot].push_back(t);
        rad[slot] += base_rad;
    }
    // Modes beyond the cutoff, each bounded through |X| <= m.
    rad[4] += static_cast<double>(m) * s.tail_bound(1);

    double others = 0.0;
    double total_rad = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < 6; ++j) {
        const double v = pairwise_sum(vals[j]);
        rep.parts[j] = {v, (rad[j] + pairwise_error_bound(vals[j])) * (1.0 + 4.0 * u)};
        total += v;
        total_rad += rep.parts[j].radius;
        if (j > 0)
            others += std::abs(v) + rep.parts[j].radius;
    }
    const double s1_low = std::abs(rep.parts[0].value) - rep.parts[0].radius;
    for (std::size_t j = 1; j < 6; ++j)
        rep.s1_dominates_each[j - 1] = s1_low > std::abs(rep.parts[j].value) + rep.parts[j].radius;
    rep.s1_dominates = s1_low > others;
    rep.total = {total, total_rad + 8.0 * u * std::abs(total)};
    return rep;
}

std::vector<CircleInterval> i_n_intervals(std::int64_t q, double phase, std::size_t n)
{
    if (q < 1)
        throw InvalidArgument("frequency must be positive");
    std::vector<CircleInterval> out;
    if (n <= 4)
        return out;
    const double inv = 1.0 / static_cast<double>(n);
    const double len = (0.5 - 2.0 * inv) / static_cast<double>(q);
    const double starts[2] = {inv, 0.5 + inv};
    out.reserve(static_cast<std::size_t>(2 * q));
    for (std::int64_t j = 0; j < q; ++j) {
        for (double y0 : starts) {
            double lo = (y0 - phase + static_cast<double>(j)) / static_cast<double>(q);
            lo -= std::floor(lo);
            out.push_back({lo, lo + len});
        }
    }
    std::sort(out.begin(), out.end(), [](const CircleInterval &a, const CircleInterval &b) { return a.lo < b.lo; });
    return out;
}

std::vector<CircleInterval> i_n_set(const Roof &roof, const CFNumber &cf, std::size_t n)
{
    if (n > cf.depth())
        throw InsufficientDepth("I_n needs q_n within the prefix");
    const std::int64_t q = to_i64(cf.q(n));
    const std::complex<double> c = roof.series().coefficient(q);
    if (c == 0.0)
        throw MissingMode("c_" + std::to_string(q) + " = 0");
    return i_n_intervals(q, std::arg(c) / kTwoPi, n);
}

namespace
{

// Walks the orbit one step at a time; needed for roofs without a closed form.
CrossingCount crossing_walk(const Roof &roof, const Rotation &rot, const Fraction &x, double s)
{
    const double lip = roof.lipschitz();
    const bool jump = !roof.is_analytic();
    CrossingCount out;
    double sum = 0.0;
    double rad = 0.0;
    auto term = [&](std::int64_t j) {
        rot.require(j);
        const double phi = rot.phase(x, j);
        const double err = rot.phase_error(j);
        const RoofValue v = roof.eval(phi, 0);
        double r = v.radius + lip * err + 2.0 * u * std::abs(sum);
        if (jump && (phi < err || phi > 1.0 - err))
            r += std::abs(roof.slope());
        return std::pair{v.value, r};
    };
    if (s >= 0.0) {
        // S_n for n = 0, 1, ...: certain while S_n + rad <= s, possible while S_n - rad <= s.
        std::int64_t n = 0;
        out.lo = out.best = 0;
        out.hi = 0;
        for (;;) {
            const auto [v, r] = term(n);
            sum += v;
            rad += r;
            ++n;
            if (sum + rad <= s)
                out.lo = n;
            if (sum <= s)
                out.best = n;
            if (sum - rad <= s)
                out.hi = n;
            else
                break;
        }
    } else {
        // S_{-n} = -(f(x - alpha) + ... + f(x - n alpha)); need S_n <= s.
        std::int64_t n = 0;
        bool lo_set = false, best_set = false, hi_set = false;
        for (;;) {
            --n;
            const auto [v, r] = term(n);
            sum -= v;
            rad += r;
            if (!hi_set && sum - rad <= s) {
                out.hi = n;
                hi_set = true;
            }
            if (!best_set && sum <= s) {
                out.best = n;
                best_set = true;
            }
            if (!lo_set && sum + rad <= s) {
                out.lo = n;
                lo_set = true;
                break;
            }
        }
    }
    return out;
}

} // namespace

CrossingCount crossing_count(const Roof &roof, const Rotation &rot, const Fraction &x, double y, double t)
{
    const double s = y + t;
    if (!roof.is_analytic())
        return crossing_walk(roof, rot, x, s);

    auto S = [&](std::int64_t n) { return birkhoff_fast(roof, rot, x, n); };
    const double mean = roof.mean();
    const double minf = std::max(roof.min_value(), 1e-300);
    std::int64_t guess = static_cast<std::int64_t>(std::floor(s / mean));
    // lo with S(lo) <= s, hi with S(hi) > s.
    std::int64_t lo, hi;
    if (S(guess).value <= s) {
        lo = guess;
        std::int64_t step = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(std::abs(s) / minf * 1e-6)));
        hi = lo + step;
        while (S(hi).value <= s) {
            lo = hi;
            step *= 2;
            hi = lo + step;
        }
    } else {
        hi = guess;
        std::int64_t step = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(std::abs(s) / minf * 1e-6)));
        lo = hi - step;
        while (S(lo).value > s) {
            hi = lo;
            step *= 2;
            lo = hi - step;
        }
    }
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (S(mid).value <= s)
            lo = mid;
        else
            hi = mid;
    }
    CrossingCount out;
    out.best = lo;
    out.lo = lo;
    for (;;) {
        const BirkhoffValue v = S(out.lo);
        if (v.value + v.radius <= s)
            break;
        --out.lo;
    }
    out.hi = lo;
    for (;;) {
        const BirkhoffValue v = S(out.hi + 1);
        if (v.value - v.radius > s)
            break;
        ++out.hi;
    }
    return out;
}

CrossingBounds crossing_bounds(const Roof &roof, const Rotation &rot, const Fraction &a, const Fraction &b, double t,
                               std::size_t grid)
{
    if (grid < 1)
        throw InvalidArgument("grid must have at least one cell");
    CrossingBounds out;
    out.t = t;
    out.t0 = 4.0 * roof.max_value();
    out.lower = std::numeric_limits<std::int64_t>::max();
    out.upper = std::numeric_limits<std::int64_t>::min();
    double av = a.value();
    double bv = b.value();
    if (bv < av)
        bv += 1.0;
    for (std::size_t i = 0; i <= grid; ++i) {
        Fraction x;
        if (i == 0)
            x = a;
        else if (i == grid)
            x = b;
        else
            x = Fraction::from_double(av + (bv - av) * static_cast<double>(i) / static_cast<double>(grid));
        const CrossingCount c = crossing_count(roof, rot, x, 0.0, t);
        out.lower = std::min(out.lower, c.lo);
        out.upper = std::max(out.upper, c.hi);
    }
    bool validated = true;
    try {
        (void)roof.validate();
    } catch (const InvalidRoof &) {
        validated = false;
    }
    out.window_applies = validated && roof.is_analytic() && t >= out.t0;
    out.window_holds = static_cast<double>(out.lower) >= t / 2.0 && static_cast<double>(out.upper) <= 2.0 * t;
    out.range_holds = static_cast<double>(out.lower) >= t / roof.max_value() - 1.0 &&
                      static_cast<double>(out.upper) <= t / roof.min_value() + 1.0;
    return out;
}

StretchReport stretch_report(const std::function<double(double)> &g, double a, double b, std::size_t grid_size)
{
    if (!(b > a))
        throw InvalidArgument("stretch interval needs a < b");
    if (grid_size < 1024)
        throw InvalidArgument("stretch grid needs at least 1024 cells");
    StretchReport rep;
    rep.a = a;
    rep.b = b;
    rep.grid_size = grid_size;
    rep.resolution = 2.0 / static_cast<double>(grid_size);
    std::vector<double> ys(grid_size + 1);
    const double h = (b - a) / static_cast<double>(grid_size);
    for (std::size_t i = 0; i <= grid_size; ++i)
        ys[i] = g(i == grid_size ? b : a + h * static_cast<double>(i));
    const double ga = ys.front();
    const double gb = ys.back();
    if (ga == gb)
        throw DegenerateStretch("g(a) = g(b) = " + std::to_string(ga));
    const auto [mn, mx] = std::minmax_element(ys.begin(), ys.end());
    rep.total_stretch = *mx - *mn;
    rep.endpoint_stretch = std::abs(gb - ga);

    rep.monotone_segments = 1;
    int dir = 0;
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double d = ys[i + 1] - ys[i];
        const int sd = d > 0 ? 1 : (d < 0 ? -1 : 0);
        if (sd != 0 && dir != 0 && sd != dir)
            ++rep.monotone_segments;
        if (sd != 0)
            dir = sd;
    }

    const double lo = std::min(ga, gb);
    const double span = std::abs(gb - ga);
    std::array<double, kStretchLevels + 1> levels{};
    for (std::size_t i = 0; i <= kStretchLevels; ++i)
        levels[i] = lo + span * static_cast<double>(i) / static_cast<double>(kStretchLevels);

    // Measure of {x : u <= g(x) <= v} under the piecewise-linear interpolant.
    auto measure = [&](double uu, double vv) {
        double total = 0.0;
        for (std::size_t i = 0; i < grid_size; ++i) {
            const double g0 = ys[i], g1 = ys[i + 1];
            const double d = g1 - g0;
            if (d == 0.0) {
                if (uu <= g0 && g0 <= vv)
                    total += h;
                continue;
            }
            double s0 = (uu - g0) / d, s1 = (vv - g0) / d;
            if (s0 > s1)
                std::swap(s0, s1);
            s0 = std::max(s0, 0.0);
            s1 = std::min(s1, 1.0);
            if (s1 > s0)
                total += (s1 - s0) * h;
        }
        return total;
    };
    double eps = 0.0;
    for (std::size_t i = 0; i < kStretchLevels; ++i) {
        for (std::size_t j = i + 1; j <= kStretchLevels; ++j) {
            const double expected = (levels[j] - levels[i]) / span * (b - a);
            const double got = measure(levels[i], levels[j]);
            eps = std::max(eps, std::abs(got / expected - 1.0));
        }
    }
    rep.epsilon = eps;
    return rep;
}

DenjoyKoksma denjoy_koksma_gap(const Roof &roof, const Rotation &rot, const Fraction &x, std::size_t n)
{
    const CFNumber &cf = rot.cf();
    if (n > cf.depth())
        throw InsufficientDepth("q_n beyond the prefix");
    const std::int64_t qn = to_i64(cf.q(n));
    const BirkhoffValue s = birkhoff_fast(roof, rot, x, qn);
    DenjoyKoksma out;
    const double target = static_cast<double>(qn) * roof.mean();
    const bool exact = std::fma(static_cast<double>(qn), roof.mean(), -target) == 0.0;
    out.gap = std::abs(s.value - target);
    out.radius = s.radius + (exact ? 0.0 : u * std::abs(target)) + u * out.gap;
    out.variation = roof.variation_bound();
    out.holds = out.gap + out.radius < out.variation || (out.variation == 0.0 && out.gap + out.radius == 0.0);
    return out;
}

Oscillation c1_oscillation(const Roof &g, const Rotation &rot, const Fraction &x, const Fraction &y, std::int64_t n)
{
    const BirkhoffValue sx = birkhoff_fast(g, rot, x, n);
    const BirkhoffValue sy = birkhoff_fast(g, rot, y, n);
    Oscillation out;
    out.oscillation = std::abs(sx.value - sy.value);
    out.radius = sx.radius + sy.radius;
    const double d = circle_gap(x.value(), y.value());
    out.scale = std::max(1.0, std::abs(static_cast<double>(n)) * d);
    out.ratio = out.oscillation / out.scale;
    return out;
}

} // namespace ergoflow
