#include <ergoflow/roofs.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ergoflow
{

namespace
{

double frac(double x) { return x - std::floor(x); }

double pow_order(double v, int order)
{
    switch (order) {
    case 0:
        return 1.0;
    case 1:
        return v;
    case 2:
        return v * v;
    default:
        return std::pow(v, order);
    }
}

void check_order(int order)
{
    if (order < 0 || order > 2)
        throw InvalidArgument("derivative order must be 0, 1 or 2");
}

// sum_{k in S} C r^k w(k) where S = {k > K : k divisible by step}; summed
// until the remainder is provably negligible, then closed by a geometric bound.
template <class Weight>
double decay_sum(const DecayCertificate &d, std::int64_t first, std::int64_t step, Weight w)
{
    if (d.C == 0.0)
        return 0.0;
    double sum = 0.0;
    double prev = 0.0;
    for (std::int64_t k = first;; k += step) {
        const double term = d.C * std::pow(d.r, static_cast<double>(k)) * w(k);
        if (term == 0.0)
            break;
        if (prev > 0.0) {
            const double ratio = term / prev;
            // The ratio of consecutive terms only decreases from here on.
            if (ratio < 1.0 && term * ratio / (1.0 - ratio) < 1e-18 * sum)
                return (sum + term + term * ratio / (1.0 - ratio)) * (1.0 + 1e-12);
        }
        sum += term;
        prev = term;
        if (k > first + 10'000'000 * step)
            break;
    }
    return sum * (1.0 + 1e-12);
}

} // namespace

TrigSeries::TrigSeries(std::vector<std::complex<double>> coeffs, DecayCertificate decay)
    : coeffs_(std::move(coeffs)), decay_(decay)
{
    if (coeffs_.empty())
        coeffs_.push_back(0.0);
    for (const auto &c : coeffs_)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw InvalidRoof("non-finite Fourier coefficient");
    if (std::abs(coeffs_[0].imag()) > 1e-15)
        throw InvalidRoof("c_0 must be real for a real-valued roof");
    coeffs_[0] = coeffs_[0].real();
    for (std::size_t k = 1; k < coeffs_.size(); ++k)
        if (coeffs_[k] != 0.0)
            support_.push_back(k);
    if (decay_.C < 0.0 || (decay_.C > 0.0 && !(decay_.r > 0.0 && decay_.r < 1.0)))
        throw InvalidRoof("decay certificate needs C >= 0 and 0 < r < 1");
    for (int order = 0; order <= 3; ++order) {
        double a = 0.0;
        for (const std::size_t k : support_)
            a += 2.0 * std::abs(coeffs_[k]) * pow_order(kTwoPi * static_cast<double>(k), order);
        abs_[static_cast<std::size_t>(order)] = a * (1.0 + 1e-12);
        const auto first = static_cast<std::int64_t>(cutoff()) + 1;
        tails_[static_cast<std::size_t>(order)] =
            2.0 * decay_sum(decay_, first, 1,
                            [order](std::int64_t k) { return pow_order(kTwoPi * static_cast<double>(k), order); });
    }
}

std::complex<double> TrigSeries::coefficient(std::int64_t k) const
{
    const auto a = static_cast<std::size_t>(k < 0 ? -k : k);
    if (a >= coeffs_.size())
        return 0.0;
    return k < 0 ? std::conj(coeffs_[a]) : coeffs_[a];
}

namespace
{

template <class PhaseOf>
RoofValue eval_series(const TrigSeries &s, int order, PhaseOf phase_of, double phase_err_per_k)
{
    check_order(order);
    const auto &c = s.coefficients();
    if (s.support().empty()) // constant: exact
        return {order == 0 ? c[0].real() : 0.0, 0.0, s.tail_bound(order)};
    double acc = order == 0 ? c[0].real() : 0.0;
    double abs_acc = std::abs(acc);
    double err = 0.0;
    for (const std::size_t k : s.support()) {
        const double w = kTwoPi * static_cast<double>(k);
        const double theta = kTwoPi * phase_of(static_cast<std::int64_t>(k));
        const std::complex<double> z = c[k] * std::complex<double>(std::cos(theta), std::sin(theta));
        double term = 0.0;
        switch (order) {
        case 0:
            term = 2.0 * z.real();
            break;
        case 1:
            term = -2.0 * w * z.imag();
            break;
        default:
            term = -2.0 * w * w * z.real();
            break;
        }
        acc += term;
        const double mag = 2.0 * std::abs(c[k]) * pow_order(w, order);
        abs_acc += mag;
        // Phase error moves the term by at most its derivative times the error.
        err += mag * (w * (phase_err_per_k * static_cast<double>(k) + 4.0 * kUnitRoundoff) + 6.0 * kUnitRoundoff);
    }
    err += 2.0 * static_cast<double>(s.support().size() + 2) * kUnitRoundoff * abs_acc;
    return {acc, err, s.tail_bound(order)};
}

} // namespace

RoofValue TrigSeries::eval(double x, int order) const
{
    const double xf = frac(x);
    return eval_series(*this, order, [xf](std::int64_t k) { return frac(static_cast<double>(k) * xf); },
                       2.0 * kUnitRoundoff);
}

RoofValue TrigSeries::eval(const Fraction &x, int order) const
{
    return eval_series(*this, order, [&x](std::int64_t k) { return x.scaled_phase(k); }, 0.0);
}

double TrigSeries::abs_sum(int order) const
{
    if (order < 0 || order > 3)
        throw InvalidArgument("abs_sum order must be in 0..3");
    return abs_[static_cast<std::size_t>(order)];
}

double TrigSeries::tail_bound(int order) const
{
    if (order < 0 || order > 3)
        throw InvalidArgument("tail order must be in 0..3");
    return tails_[static_cast<std::size_t>(order)];
}

double TrigSeries::multiple_weight(std::int64_t n) const
{
    double s = 0.0;
    for (std::int64_t k = 2 * n; k <= static_cast<std::int64_t>(cutoff()); k += n)
        s += std::abs(coeffs_[static_cast<std::size_t>(k)]) * static_cast<double>(k);
    return s;
}

Roof::Roof(RoofKind kind, double slope, TrigSeries series)
    : kind_(kind), slope_(slope), series_(std::move(series))
{
    const std::size_t n = kValidationGrid;
    const double h = 1.0 / static_cast<double>(n);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double abs_deriv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Fraction x{static_cast<std::int64_t>(i), static_cast<std::int64_t>(n)};
        const double xv = static_cast<double>(i) * h;
        const RoofValue g = series_.eval(x, 0);
        const double v = slope_ * xv + g.value;
        if (v < lo) {
            lo = v;
            witness_min_ = xv;
        }
        if (v > hi) {
            hi = v;
            witness_max_ = xv;
        }
        if (kind_ == RoofKind::VonNeumann)
            abs_deriv += std::abs(series_.eval(x, 1).value);
    }
    if (kind_ == RoofKind::VonNeumann) {
        // Left limit at the jump.
        const double left = slope_ + series_.eval(Fraction{0, 1}, 0).value;
        if (left < lo) {
            lo = left;
            witness_min_ = 1.0;
        }
        if (left > hi) {
            hi = left;
            witness_max_ = 1.0;
        }
    }
    const double f2 = series_.abs_sum(2);
    cert_.mean = mean();
    cert_.grid_points = n;
    cert_.grid_min = lo;
    cert_.grid_max = hi;
    // Between grid nodes f stays within h^2/8 sup|f''| of its chord.
    cert_.interpolation_slack = h * h / 8.0 * f2 + 8.0 * kUnitRoundoff * (std::abs(hi) + series_.abs_sum(0));
    cert_.tail = series_.tail_bound(0);
    cert_.lower_bound = lo - cert_.interpolation_slack;
    cert_.upper_bound = hi + cert_.interpolation_slack;
    cert_.sawtooth_variation = std::abs(slope_);
    if (kind_ == RoofKind::VonNeumann)
        cert_.variation_bound = std::abs(slope_) + h * abs_deriv + h * f2 + series_.tail_bound(1);
    else
        cert_.variation_bound = series_.abs_sum(1) + series_.tail_bound(1);
}

Roof Roof::analytic(TrigSeries series) { return Roof(RoofKind::Analytic, 0.0, std::move(series)); }

Roof Roof::von_neumann(double slope, TrigSeries ac_part)
{
    if (!(std::isfinite(slope) && slope != 0.0))
        throw InvalidRoof("von Neumann roof needs a finite nonzero slope");
    return Roof(RoofKind::VonNeumann, slope, std::move(ac_part));
}

RoofValue Roof::eval(double x, int order) const
{
    check_order(order);
    const double xf = frac(x);
    if (kind_ == RoofKind::VonNeumann && order >= 1 && xf == 0.0)
        throw DiscontinuityHit("derivative of order " + std::to_string(order) + " requested at the jump x = 0");
    RoofValue g = series_.eval(xf, order);
    if (order == 0 && slope_ != 0.0) {
        g.value += slope_ * xf;
        g.radius += 2.0 * kUnitRoundoff * std::abs(slope_);
    } else if (order == 1) {
        g.value += slope_;
    }
    return g;
}

RoofValue Roof::eval(const Fraction &x, int order) const
{
    check_order(order);
    if (kind_ == RoofKind::VonNeumann && order >= 1 && x.num == 0)
        throw DiscontinuityHit("derivative of order " + std::to_string(order) + " requested at the jump x = 0");
    RoofValue g = series_.eval(x, order);
    if (order == 0 && slope_ != 0.0) {
        g.value += slope_ * x.value();
        g.radius += 2.0 * kUnitRoundoff * std::abs(slope_);
    } else if (order == 1) {
        g.value += slope_;
    }
    return g;
}

double Roof::value(double x) const
{
    const double xf = frac(x);
    return slope_ * xf + series_.eval(xf, 0).value;
}

double Roof::lipschitz() const { return std::abs(slope_) + series_.abs_sum(1) + series_.tail_bound(1); }

RoofCertificate Roof::validate() const
{
    auto fail = [](const std::string &what, double witness) {
        std::ostringstream os;
        os.precision(17);
        os << what << " (witness x = " << witness << ")";
        throw InvalidRoof(os.str());
    };
    if (std::abs(mean() - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "mean is " << mean() << ", expected 1";
        throw InvalidRoof(os.str());
    }
    if (kind_ == RoofKind::Analytic) {
        if (cert_.lower_bound < 0.5 - cert_.tail)
            fail("roof drops below 1/2", witness_min_);
        if (cert_.upper_bound > 1.5 + cert_.tail)
            fail("roof exceeds 3/2", witness_max_);
    } else {
        if (cert_.lower_bound - cert_.tail <= 0.0)
            fail("roof is not positive", witness_min_);
    }
    return cert_;
}

GapSequence gap_sequence(const Roof &roof, std::size_t count)
{
    if (!roof.is_analytic())
        throw UnsupportedRoof("gap sequence is defined for analytic roofs");
    const TrigSeries &s = roof.series();
    GapSequence out;
    const double inf = std::numeric_limits<double>::infinity();
    double last_ratio = -inf;
    for (std::int64_t n = 1; n <= static_cast<std::int64_t>(s.cutoff()) && out.entries.size() < count; ++n) {
        const double c = std::abs(s.coefficient(n));
        if (c == 0.0)
            continue;
        GapEntry e;
        e.index = n;
        e.coefficient = c;
        const std::int64_t j0 = std::max<std::int64_t>(2, static_cast<std::int64_t>(s.cutoff()) / n + 1);
        e.tail_slack = decay_sum(s.decay(), j0 * n, n, [](std::int64_t k) { return static_cast<double>(k); });
        e.weight = s.multiple_weight(n) + e.tail_slack;
        e.ratio = e.weight == 0.0 ? inf : c / e.weight;
        if (e.ratio > last_ratio) {
            last_ratio = e.ratio;
            out.entries.push_back(e);
            if (e.ratio == inf)
                break;
        }
    }
    if (out.entries.size() < count)
        throw InsufficientModes("only " + std::to_string(out.entries.size()) + " gap indices certified, " +
                                std::to_string(count) + " requested");
    return out;
}

} // namespace ergoflow
