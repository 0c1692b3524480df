#include <ergoflow/flow.hpp>
#include <ergoflow/parallel.hpp>

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>

namespace ergoflow
{

namespace
{

constexpr double u = kUnitRoundoff;

struct Crossing {
    std::int64_t n = 0;
    double sum = 0.0;
    double radius = 0.0;
};

// The n with S_n(z) <= s < S_{n+1}(z) for z = base + shift alpha.
Crossing find_crossing(const Roof &roof, const Rotation &rot, const Fraction &base, std::int64_t shift, double s)
{
    if (!roof.is_analytic()) {
        const double lip = roof.lipschitz();
        const double jump = std::abs(roof.slope());
        Crossing c;
        auto term = [&](std::int64_t j) {
            rot.require(j);
            const double phi = rot.phase(base, j);
            const double err = rot.phase_error(j);
            const RoofValue v = roof.eval(phi, 0);
            double r = v.radius + lip * err;
            if (phi < err || phi > 1.0 - err)
                r += jump;
            return std::pair{v.value, r};
        };
        if (s >= 0.0) {
            for (;;) {
                const auto [v, r] = term(shift + c.n);
                if (c.sum + v > s)
                    break;
                c.sum += v;
                c.radius += r + u * std::abs(c.sum);
                ++c.n;
            }
        } else {
            while (c.sum > s) {
                --c.n;
                const auto [v, r] = term(shift + c.n);
                c.sum -= v;
                c.radius += r + u * std::abs(c.sum);
            }
        }
        return c;
    }

    const BirkhoffValue origin = birkhoff_fast(roof, rot, base, shift);
    auto S = [&](std::int64_t n) {
        const BirkhoffValue v = birkhoff_fast(roof, rot, base, shift + n);
        return std::pair{v.value - origin.value, v.radius + v.truncation + origin.radius + origin.truncation};
    };
    std::int64_t guess = static_cast<std::int64_t>(std::floor(s / roof.mean()));
    std::int64_t lo, hi;
    std::int64_t step = 1;
    if (S(guess).first <= s) {
        lo = guess;
        hi = lo + step;
        while (S(hi).first <= s) {
            lo = hi;
            step *= 2;
            hi = lo + step;
        }
    } else {
        hi = guess;
        lo = hi - step;
        while (S(lo).first > s) {
            hi = lo;
            step *= 2;
            lo = hi - step;
        }
    }
    while (hi - lo > 1) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (S(mid).first <= s)
            lo = mid;
        else
            hi = mid;
    }
    const auto [sum, radius] = S(lo);
    return {lo, sum, radius};
}

} // namespace

FlowPoint make_flow_point(const Roof &roof, const Rotation &rot, const Fraction &x, double y)
{
    (void)rot;
    const RoofValue f = roof.eval(x, 0);
    if (!(y >= 0.0) || !(y < f.value))
        throw InvalidArgument("height " + std::to_string(y) + " outside [0, f(x)) with f(x) = " +
                              std::to_string(f.value));
    return {x, 0, y, 0.0};
}

FlowPoint flow_apply(const Roof &roof, const Rotation &rot, const FlowPoint &p, double t)
{
    if (t == 0.0)
        return p;
    const double s = p.y + t;
    const Crossing c = find_crossing(roof, rot, p.base, p.shift, s);
    FlowPoint out;
    out.base = p.base;
    out.shift = p.shift + c.n;
    rot.require(out.shift);
    out.y = std::max(0.0, s - c.sum);
    out.radius = p.radius + c.radius + u * (std::abs(s) + std::abs(c.sum));
    return out;
}

Observable::Observable(std::map<std::int64_t, std::complex<double>> modes, std::vector<double> poly, double cutoff,
                       std::string label)
    : modes_(std::move(modes)), poly_(std::move(poly)), cutoff_(cutoff), label_(std::move(label))
{
    if (poly_.empty())
        poly_ = {0.0};
    if (!(cutoff_ > 0.0))
        throw InvalidArgument("observable cutoff must be positive");
}

Observable Observable::one() { return {}; }

Observable Observable::mode(std::int64_t k) { return {{{k, 1.0}}, {1.0}, std::numeric_limits<double>::infinity(), "e(" + std::to_string(k) + "x)"}; }

Observable Observable::cosine(std::int64_t k)
{
    if (k == 0)
        return one();
    return {{{k, 0.5}, {-k, 0.5}}, {1.0}, std::numeric_limits<double>::infinity(), "cos(2pi " + std::to_string(k) + "x)"};
}

Observable Observable::cosine_below(std::int64_t k, double h)
{
    Observable g = cosine(k);
    g.cutoff_ = h;
    g.label_ += " 1{y<" + std::to_string(h) + "}";
    return g;
}

std::complex<double> Observable::phi(double x) const
{
    std::complex<double> s = 0.0;
    for (const auto &[k, c] : modes_) {
        if (k == 0) {
            s += c;
            continue;
        }
        const double th = kTwoPi * (static_cast<double>(k) * x - std::floor(static_cast<double>(k) * x));
        s += c * std::complex<double>(std::cos(th), std::sin(th));
    }
    return s;
}

double Observable::psi(double y) const
{
    if (!(y < cutoff_))
        return 0.0;
    double v = 0.0;
    for (auto it = poly_.rbegin(); it != poly_.rend(); ++it)
        v = v * y + *it;
    return v;
}

double Observable::sup_phi() const
{
    double s = 0.0;
    for (const auto &[k, c] : modes_)
        s += std::abs(c);
    return s;
}

double Observable::lip_phi() const
{
    double s = 0.0;
    for (const auto &[k, c] : modes_)
        s += kTwoPi * std::abs(static_cast<double>(k)) * std::abs(c);
    return s;
}

double Observable::sup_psi(double h) const
{
    h = std::min(h, cutoff_);
    double s = 0.0, p = 1.0;
    for (double a : poly_) {
        s += std::abs(a) * p;
        p *= h;
    }
    return s;
}

double Observable::lip_psi(double h) const
{
    h = std::min(h, cutoff_);
    double s = 0.0, p = 1.0;
    for (std::size_t i = 1; i < poly_.size(); ++i) {
        s += static_cast<double>(i) * std::abs(poly_[i]) * p;
        p *= h;
    }
    return s;
}

std::complex<double> inner_product(const Roof &roof, const Observable &g1, const Observable &g2)
{
    // Q(h) = int_0^{min(h, c)} P1 P2 dy in closed form.
    std::vector<double> prod(g1.poly().size() + g2.poly().size() - 1, 0.0);
    for (std::size_t i = 0; i < g1.poly().size(); ++i)
        for (std::size_t j = 0; j < g2.poly().size(); ++j)
            prod[i + j] += g1.poly()[i] * g2.poly()[j];
    const double cut = std::min(g1.cutoff(), g2.cutoff());
    auto Q = [&](double h) {
        h = std::min(h, cut);
        double v = 0.0;
        for (std::size_t i = prod.size(); i-- > 0;)
            v = v * h + prod[i] / static_cast<double>(i + 1);
        return v * h;
    };
    using Rule = boost::math::quadrature::gauss<double, 20>;
    constexpr int panels = 256;
    auto integrand_re = [&](double x) { return (g1.phi(x) * std::conj(g2.phi(x))).real() * Q(roof.value(x)); };
    auto integrand_im = [&](double x) { return (g1.phi(x) * std::conj(g2.phi(x))).imag() * Q(roof.value(x)); };
    std::vector<double> re(panels), im(panels);
    for (int i = 0; i < panels; ++i) {
        const double a = static_cast<double>(i) / panels;
        const double b = static_cast<double>(i + 1) / panels;
        re[static_cast<std::size_t>(i)] = Rule::integrate(integrand_re, a, b);
        im[static_cast<std::size_t>(i)] = Rule::integrate(integrand_im, a, b);
    }
    return std::complex<double>(pairwise_sum(re), pairwise_sum(im)) / roof.mean();
}

std::complex<double> observable_mean(const Roof &roof, const Observable &g)
{
    return inner_product(roof, g, Observable::one());
}

std::optional<std::pair<double, double>> sample_under_roof(const Roof &roof, std::uint64_t seed, std::uint64_t i)
{
    CounterRng rng(seed, i);
    const std::uint64_t stratum = i % kStrata;
    // x on the 2^-52 grid so that it converts to a Fraction without rounding.
    const std::uint64_t cell = rng.next_u64() >> 20; // 44 bits
    const double x = static_cast<double>((stratum << 44) | cell) * 0x1p-52;
    const double y = rng.next_unit() * roof.max_value();
    if (!(y < roof.eval(Fraction::from_double(x), 0).value))
        return std::nullopt;
    return std::pair{x, y};
}

namespace
{

struct ComplexStats {
    std::complex<double> mean;
    double std_error = 0.0;
};

ComplexStats stats(const std::vector<std::complex<double>> &v)
{
    ComplexStats s;
    if (v.empty())
        return s;
    const double n = static_cast<double>(v.size());
    s.mean = pairwise_sum(v) / n;
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        sq[i] = std::norm(v[i] - s.mean);
    const double var = v.size() > 1 ? pairwise_sum(sq) / (n - 1.0) : 0.0;
    s.std_error = std::sqrt(var / n);
    return s;
}

} // namespace

CorrelationEstimate correlate(const Roof &roof, const Rotation &rot, const Observable &g1, const Observable &g2,
                              double t, const SamplingOptions &opt)
{
    if (opt.proposals < 1000)
        throw InvalidArgument("need at least 1000 samples");
    const std::size_t M = opt.proposals;
    std::vector<std::complex<double>> moved(M), still(M);
    std::vector<char> accepted(M, 0);
    parallel_for(
        M,
        [&](std::size_t i) {
            const auto smp = sample_under_roof(roof, opt.seed, i);
            if (!smp)
                return;
            const auto [x, y] = *smp;
            const FlowPoint p{Fraction::from_double(x), 0, y, 0.0};
            const FlowPoint q = flow_apply(roof, rot, p, t);
            const std::complex<double> w = std::conj(g2(x, y));
            moved[i] = g1(q.x(rot), q.y) * w;
            still[i] = g1(x, y) * w;
            accepted[i] = 1;
        },
        opt.workers);
    std::vector<std::complex<double>> a, d;
    a.reserve(M);
    d.reserve(M);
    for (std::size_t i = 0; i < M; ++i) {
        if (!accepted[i])
            continue;
        a.push_back(moved[i]);
        d.push_back(moved[i] - still[i]);
    }
    const ComplexStats sa = stats(a);
    const ComplexStats sd = stats(d);
    CorrelationEstimate out;
    out.t = t;
    out.estimate = sa.mean;
    out.std_error = sa.std_error;
    out.accepted = a.size();
    out.paired_shift = sd.mean;
    out.paired_std_error = sd.std_error;
    return out;
}

double mode_sup_gap(const Roof &roof, const Rotation &rot, std::int64_t h, bool include_tail)
{
    if (h == 0)
        return 0.0;
    if (!roof.is_analytic()) {
        // Denjoy-Koksma along convergent denominators.
        const CFNumber &cf = rot.cf();
        const auto ah = static_cast<std::uint64_t>(h < 0 ? -h : h);
        for (std::size_t n = 0; n <= cf.depth(); ++n)
            if (cf.q(n) == ah)
                return roof.variation_bound();
        return std::numeric_limits<double>::infinity();
    }
    const TrigSeries &s = roof.series();
    if (s.support().empty())
        return 0.0;
    std::vector<double> terms;
    terms.reserve(s.support().size());
    for (const std::size_t k : s.support()) {
        const ComplexEnclosure X = x_value(rot, h, static_cast<std::int64_t>(k));
        terms.push_back(2.0 * std::abs(s.coefficient(static_cast<std::int64_t>(k))) * (std::abs(X.value) + X.radius));
    }
    const double tail = include_tail ? std::abs(static_cast<double>(h)) * s.tail_bound(0) : 0.0;
    return (pairwise_sum(terms) + pairwise_error_bound(terms) + tail) * (1.0 + 4.0 * u);
}

namespace
{

// sup|g2| [Lip phi1 ||h alpha|| sup psi1 + sup|phi1| Lip psi1 D + 2 sup|g1| (2D + Lip f ||h alpha||) / int f]
// with D >= sup |S_h f - t| for the simulated model; an extra jump term when
// psi1 is cut below max f.
double rigidity_bound(const Roof &roof, const Rotation &rot, const Observable &g1, const Observable &g2, double t)
{
    const double mean = roof.mean();
    const auto h = static_cast<std::int64_t>(std::llround(t / mean));
    double D;
    double shift;
    try {
        D = mode_sup_gap(roof, rot, h, false) + std::abs(static_cast<double>(h) * mean - t);
        const double ph = rot.rotation_phase(h, 1);
        shift = std::min(ph, 1.0 - ph) + rot.phase_error(h, 1);
    } catch (const Error &) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double maxf = roof.max_value();
    const double sup_g1 = g1.sup_phi() * g1.sup_psi(maxf);
    const double sup_g2 = g2.sup_phi() * g2.sup_psi(maxf);
    const double lip_f = roof.is_analytic() ? roof.lipschitz() : std::abs(roof.slope()) + roof.lipschitz();
    double b = g1.lip_phi() * shift * g1.sup_psi(maxf) + g1.sup_phi() * g1.lip_psi(maxf) * D +
               2.0 * sup_g1 * (2.0 * D + lip_f * shift) / mean;
    if (g1.cutoff() < maxf)
        b += 2.0 * sup_g1 * D / mean;
    return sup_g2 * b;
}

bool strictly_decreasing(const std::vector<Score> &s)
{
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!(s[i].value < s[i - 1].value))
            return false;
    return !s.empty();
}

} // namespace

Diagnostics sequence_diagnostics(const Roof &roof, const Rotation &rot, const Observable &g1, const Observable &g2,
                                 const std::vector<double> &times, const SamplingOptions &opt)
{
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw InvalidArgument("times must be increasing");
    Diagnostics d;
    d.options = opt;
    d.inner = inner_product(roof, g1, g2);
    d.product = observable_mean(roof, g1) * std::conj(observable_mean(roof, g2));
    d.rigidity_within_bound = true;
    for (const double t : times) {
        const CorrelationEstimate e = correlate(roof, rot, g1, g2, t, opt);
        d.series.push_back(e);
        Score r{std::abs(e.paired_shift), e.paired_std_error, 0.0};
        r.bound = rigidity_bound(roof, rot, g1, g2, t) + 3.0 * r.std_error;
        if (std::isnan(r.bound) || r.value > r.bound)
            d.rigidity_within_bound = false;
        d.rigidity.push_back(r);
        d.mixing.push_back({std::abs(e.estimate - d.product), e.std_error, std::numeric_limits<double>::quiet_NaN()});
    }
    d.rigidity_decreasing = strictly_decreasing(d.rigidity);
    d.mixing_decreasing = strictly_decreasing(d.mixing);
    return d;
}

TailsReport tails_estimate(const Roof &roof, const Rotation &rot, const std::vector<std::int64_t> &times,
                           const std::vector<double> &targets, std::size_t samples, std::uint64_t seed,
                           std::size_t workers)
{
    if (times.size() != targets.size() || times.empty())
        throw InvalidArgument("times and targets must be non-empty and of equal length");
    for (const double a : targets)
        if (!std::isfinite(a))
            throw InvalidArgument("targets must be finite");
    if (samples < 1)
        throw InvalidArgument("need at least one sample");
    for (const auto h : times)
        rot.require(h);

    TailsReport rep;
    rep.times = times;
    rep.targets = targets;
    rep.samples = samples;
    rep.seed = seed;
    const std::size_t T = times.size();
    for (std::size_t n = 0; n < T; ++n) {
        const double gap = mode_sup_gap(roof, rot, times[n]);
        rep.sup_bounds.push_back(gap + std::abs(static_cast<double>(times[n]) * roof.mean() - targets[n]));
    }
    rep.vanish_beyond = *std::max_element(rep.sup_bounds.begin(), rep.sup_bounds.end());

    std::vector<double> dev(samples * T);
    parallel_for(
        samples,
        [&](std::size_t i) {
            CounterRng rng(seed, i);
            const std::uint64_t stratum = i % kStrata;
            const double xd = static_cast<double>((stratum << 44) | (rng.next_u64() >> 20)) * 0x1p-52;
            const Fraction x = Fraction::from_double(xd);
            for (std::size_t n = 0; n < T; ++n)
                dev[i * T + n] = std::abs(birkhoff_fast(roof, rot, x, times[n]).value - targets[n]);
        },
        workers);

    rep.sample_max.assign(T, 0.0);
    std::vector<std::vector<double>> sorted(T);
    for (std::size_t n = 0; n < T; ++n) {
        sorted[n].resize(samples);
        for (std::size_t i = 0; i < samples; ++i) {
            sorted[n][i] = dev[i * T + n];
            rep.sample_max[n] = std::max(rep.sample_max[n], sorted[n][i]);
        }
        std::sort(sorted[n].begin(), sorted[n].end());
    }
    const double tmax = *std::max_element(rep.sample_max.begin(), rep.sample_max.end());
    for (std::size_t k = 0; k <= kTailGrid; ++k) {
        const double t = tmax * static_cast<double>(k) / static_cast<double>(kTailGrid);
        double tail = 0.0;
        for (std::size_t n = 0; n < T; ++n) {
            const auto it = std::lower_bound(sorted[n].begin(), sorted[n].end(), t);
            tail = std::max(tail, static_cast<double>(sorted[n].end() - it) / static_cast<double>(samples));
        }
        assert(rep.tail.empty() || tail <= rep.tail.back().tail);
        rep.tail.push_back({t, tail});
    }

    // Least squares on log tail over the positive part of the grid.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (const auto &p : rep.tail) {
        if (p.tail <= 0.0)
            continue;
        const double ly = std::log(p.tail);
        sx += p.t;
        sy += ly;
        sxx += p.t * p.t;
        sxy += p.t * ly;
        ++cnt;
    }
    const double denom = static_cast<double>(cnt) * sxx - sx * sx;
    if (cnt >= 2 && denom > 0.0) {
        const double slope = (static_cast<double>(cnt) * sxy - sx * sy) / denom;
        rep.b = -slope;
        if (rep.b > 0.0) {
            for (const auto &p : rep.tail)
                rep.C = std::max(rep.C, p.tail * std::exp(rep.b * p.t));
            rep.dominates = std::all_of(rep.tail.begin(), rep.tail.end(), [&](const TailPoint &p) {
                return p.tail <= rep.C * std::exp(-rep.b * p.t) * (1.0 + 1e-12);
            });
        }
    }
    rep.fitted = rep.b > 0.0 && rep.dominates;
    return rep;
}

} // namespace ergoflow
