#include <ergoflow/constructor.hpp>
#include <ergoflow/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ergoflow
{

namespace
{

std::int64_t to_i64(const BigInt &v)
{
    if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
        throw RangeError(v.str() + " does not fit 64 bits");
    return v.convert_to<std::int64_t>();
}

BigInt floor_div(const BigInt &a, const BigInt &b)
{
    BigInt q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

BigRational mid(const RationalInterval &r) { return (r.lower + r.upper) / 2; }

} // namespace

BigRational eta_threshold(std::size_t k, const GapSequence &gap)
{
    if (k < 1 || k > gap.entries.size())
        throw InvalidArgument("gap index k = " + std::to_string(k) + " outside 1.." +
                              std::to_string(gap.entries.size()));
    const double c = gap.entries[k - 1].coefficient;
    if (!(c > 0.0))
        throw MissingMode("gap entry " + std::to_string(k) + " has no coefficient");
    const BigRational cr = exact_rational(c);
    return BigRational(2 * BigInt(k) * BigInt(k)) / (cr * cr);
}

std::size_t eta_index(std::size_t k, const GapSequence &gap, const CFNumber &beta)
{
    const BigRational threshold = eta_threshold(k, gap);
    for (std::size_t e = 0; e <= beta.depth(); ++e)
        if (BigRational(beta.q(e)) > threshold)
            return e;
    throw InsufficientDepth("no q'_eta > " + to_string(threshold) + " within depth " + std::to_string(beta.depth()));
}

bool ConstructionReport::all_exact() const
{
    return std::all_of(stages.begin(), stages.end(), [](const StageRecord &s) { return !s.substituted; });
}

bool ConstructionReport::all_growth() const
{
    return std::all_of(stages.begin(), stages.end(), [](const StageRecord &s) { return s.growth; });
}

ConstructionReport build_alpha(const CFNumber &beta, const Roof &roof, const GapSequence &gap, std::size_t stages,
                               const ConstructionOptions &opt)
{
    if (stages > gap.entries.size())
        throw InvalidArgument("requested " + std::to_string(stages) + " stages but the gap sequence has " +
                              std::to_string(gap.entries.size()) + " entries");
    const std::size_t budget = beta.int_budget_bits();
    std::vector<BigInt> a;
    // q_{-1} = 0, q_0 = 1, then the recursion; kept in sync with `a`.
    std::vector<BigInt> q{BigInt(0), BigInt(1)};
    auto push = [&](const BigInt &quotient) {
        a.push_back(quotient);
        q.push_back(quotient * q[q.size() - 1] + q[q.size() - 2]);
        if (bit_length(q.back()) > budget)
            throw BudgetExceeded("q_" + std::to_string(a.size()) + " needs " + std::to_string(bit_length(q.back())) +
                                 " bits, budget " + std::to_string(budget));
    };
    for (const BigInt &v : opt.seed) {
        if (v < 1)
            throw InvalidCF("seed quotients must be positive");
        push(v);
    }

    ConstructionReport rep;
    rep.targets = gap;
    const TrigSeries &series = roof.series();
    for (std::size_t m = 1; m <= stages; ++m) {
        StageRecord st;
        st.stage = m;
        st.intended_l = gap.entries[m - 1].index;
        st.eta = eta_index(m, gap, beta);

        const BigInt qd = q[q.size() - 1];
        const BigInt qd1 = q[q.size() - 2];
        const BigInt l(st.intended_l);
        BigInt quotient;
        if (l > qd1 && (l - qd1) % qd == 0 && (l - qd1) / qd >= 1) {
            quotient = (l - qd1) / qd;
        } else {
            // Nearest reachable a q_d + q_{d-1} carrying a nonzero stored mode.
            st.substituted = true;
            std::optional<BigInt> best;
            BigInt best_gap;
            for (BigInt cand = 1;; ++cand) {
                const BigInt qc = cand * qd + qd1;
                if (qc > BigInt(series.cutoff()))
                    break;
                if (series.coefficient(to_i64(qc)) == 0.0)
                    continue;
                const BigInt g = qc > l ? BigInt(qc - l) : BigInt(l - qc);
                if (!best || g < best_gap) {
                    best = cand;
                    best_gap = g;
                }
            }
            if (!best)
                throw ConstructionFailed("stage " + std::to_string(m) + ": no denominator a q_d + q_{d-1} up to the cutoff " +
                                         std::to_string(series.cutoff()) + " carries a nonzero mode");
            quotient = *best;
        }
        push(quotient);
        st.n = a.size();
        st.achieved_qn = q.back();
        st.membership = st.achieved_qn == l;

        const BigInt nn(st.n);
        st.growth_bound = 2 * beta.q(st.eta) * nn * nn;
        BigInt grow = floor_div(st.growth_bound - q[q.size() - 2], q.back()) + 1;
        if (grow < 1)
            grow = 1;
        push(grow);
        st.achieved_qn1 = q.back();
        st.growth = st.achieved_qn1 > st.growth_bound;
        rep.stages.push_back(st);
    }
    for (std::size_t i = 0; i < opt.padding; ++i)
        push(BigInt(1));
    if (a.empty())
        throw InvalidArgument("empty construction: no seed, stages or padding");
    rep.alpha = CFNumber(a, budget);
    return rep;
}

PartialPartition partition_arcs(const std::vector<CircleInterval> &arcs, double width)
{
    if (!(width > 0.0) || !std::isfinite(width))
        throw PartitionFailed("width must be positive");
    PartialPartition out;
    out.width = width;
    out.components = arcs.size();
    for (const CircleInterval &arc : arcs) {
        const double len = arc.length();
        if (len < width)
            throw PartitionFailed("width " + std::to_string(width) + " exceeds an arc of length " +
                                  std::to_string(len));
        out.set_measure += len;
        const auto pieces = static_cast<std::size_t>(std::floor(len / width));
        const double step = len / static_cast<double>(pieces);
        for (std::size_t i = 0; i < pieces; ++i) {
            const double lo = arc.lo + step * static_cast<double>(i);
            const double hi = i + 1 == pieces ? arc.hi : arc.lo + step * static_cast<double>(i + 1);
            out.intervals.push_back({lo, hi});
            out.total += hi - lo;
        }
    }
    return out;
}

PartialPartition partition_In(const Roof &roof, const CFNumber &alpha, std::size_t n, std::optional<double> width,
                              std::size_t margin)
{
    if (n > alpha.depth())
        throw InsufficientDepth("q_" + std::to_string(n) + " is beyond the prefix");
    const std::int64_t q = to_i64(alpha.q(n));
    const std::complex<double> c = roof.series().coefficient(q);
    if (c == 0.0)
        throw MissingMode("c_" + std::to_string(q) + " = 0");
    if (margin == 0)
        margin = std::max<std::size_t>(n, 8);
    const auto arcs = i_n_intervals(q, std::arg(c) / kTwoPi, margin);
    PartialPartition out = partition_arcs(arcs, width.value_or(std::abs(c)));
    out.level = n;
    out.margin = margin;
    out.frequency = q;
    out.id = "I_" + std::to_string(margin) + "(q_" + std::to_string(n) + "=" + std::to_string(q) + ")";
    return out;
}

S1S2Report s1_s2_report(const Roof &roof, const CFNumber &alpha, const PartialPartition &partition, double t)
{
    if (!roof.is_analytic())
        throw UnsupportedRoof("(S1)/(S2) need a smooth roof");
    const Rotation rot(alpha);
    const TrigSeries &s = roof.series();
    S1S2Report rep;
    rep.partition_id = partition.id;
    rep.t = t;
    rep.second_bound = 2.0 * t * (s.abs_sum(2) + s.tail_bound(2));
    rep.intervals.resize(partition.intervals.size());

    parallel_for(partition.intervals.size(), [&](std::size_t i) {
        const CircleInterval &I = partition.intervals[i];
        S1S2Interval &out = rep.intervals[i];
        out.lo = I.lo;
        out.hi = I.hi;
        const Fraction a = Fraction::from_double(I.lo);
        const Fraction b = Fraction::from_double(I.hi);
        const CrossingBounds cb = crossing_bounds(roof, rot, a, b, t);
        out.n_lower = cb.lower;
        out.n_upper = cb.upper;

        std::vector<std::int64_t> rs;
        const std::int64_t span = cb.upper - cb.lower;
        if (span + 1 <= static_cast<std::int64_t>(kS1GridR)) {
            for (std::int64_t r = cb.lower; r <= cb.upper; ++r)
                rs.push_back(r);
        } else {
            for (std::size_t j = 0; j < kS1GridR; ++j)
                rs.push_back(cb.lower + span * static_cast<std::int64_t>(j) / static_cast<std::int64_t>(kS1GridR - 1));
        }
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t ix = 0; ix < kS1GridX; ++ix) {
            const double xv = I.lo + (I.hi - I.lo) * static_cast<double>(ix) / static_cast<double>(kS1GridX - 1);
            const Fraction x = ix == 0 ? a : (ix + 1 == kS1GridX ? b : Fraction::from_double(xv));
            for (std::int64_t r : rs) {
                const BirkhoffValue v = birkhoff_fast(roof, rot, x, r, 1);
                best = std::min(best, std::max(0.0, std::abs(v.value) - v.radius - v.truncation));
            }
        }
        out.min_derivative = best;
        const double len = I.length();
        out.s1 = best * len;
        out.s2 = best > 0.0 ? rep.second_bound * len / best : std::numeric_limits<double>::infinity();
    });

    rep.s1 = std::numeric_limits<double>::infinity();
    rep.s2 = 0.0;
    for (const auto &iv : rep.intervals) {
        rep.s1 = std::min(rep.s1, iv.s1);
        rep.s2 = std::max(rep.s2, iv.s2);
    }
    if (rep.intervals.empty())
        rep.s1 = 0.0;
    rep.degenerate = rep.s1 == 0.0;
    return rep;
}

S1S2Trend s1_s2_trend(const std::vector<S1S2Report> &reports)
{
    S1S2Trend out;
    for (const auto &r : reports) {
        out.s1.push_back(r.s1);
        out.s2.push_back(r.s2);
    }
    out.s1_increasing = reports.size() >= 2;
    out.s2_decreasing = reports.size() >= 2;
    for (std::size_t i = 1; i < reports.size(); ++i) {
        out.s1_increasing = out.s1_increasing && out.s1[i] > out.s1[i - 1];
        out.s2_decreasing = out.s2_decreasing && out.s2[i] < out.s2[i - 1];
    }
    return out;
}

std::vector<BracketIndex> bracket_indices(const CFNumber &a, const CFNumber &b, IndexRange range)
{
    if (range.hi < range.lo)
        throw InvalidArgument("empty index range");
    if (range.hi > a.depth())
        throw InsufficientDepth("q_" + std::to_string(range.hi) + " is beyond the prefix");
    std::vector<BracketIndex> out;
    for (std::size_t k = range.lo; k <= range.hi; ++k) {
        BracketIndex bi;
        bi.k = k;
        bi.qk = a.q(k);
        // sigma with q'_sigma < q_k < q'_{sigma+1}
        std::size_t s = 0;
        while (s < b.depth() && b.q(s + 1) <= bi.qk)
            ++s;
        if (s == b.depth())
            throw InsufficientDepth("q_" + std::to_string(k) + " = " + bi.qk.str() +
                                    " is not bracketed by the other prefix");
        if (b.q(s) == bi.qk) {
            out.push_back(bi);
            continue;
        }
        bi.sigma = s;
        const BigInt &lo = b.q(s);
        const BigInt &hi = b.q(s + 1);
        if (a.q(a.depth()) < hi)
            throw InsufficientDepth("the prefix does not reach q'_" + std::to_string(s + 1) + " = " + hi.str());
        for (std::size_t r = 0; r <= a.depth(); ++r) {
            const BigInt &qr = a.q(r);
            if (!(lo < qr && qr < hi))
                continue;
            const BigRational v = std::min(BigRational(qr, lo), BigRational(hi, qr));
            if (!bi.value || v > *bi.value) {
                bi.value = v;
                bi.witness = r;
                bi.witness_q = qr;
            }
        }
        out.push_back(bi);
    }
    return out;
}

VNIndices vn_indices(const CFNumber &alpha, const CFNumber &beta, IndexRange m_range, IndexRange n_range)
{
    VNIndices out;
    out.M = bracket_indices(alpha, beta, m_range);
    out.N = bracket_indices(beta, alpha, n_range);
    for (std::size_t i = 0; i <= alpha.depth(); ++i)
        out.table.push_back({alpha.q(i), 'a', i});
    for (std::size_t i = 0; i <= beta.depth(); ++i)
        out.table.push_back({beta.q(i), 'b', i});
    std::stable_sort(out.table.begin(), out.table.end(),
                     [](const InterleaveEntry &x, const InterleaveEntry &y) { return x.q < y.q; });
    return out;
}

VNPartition vn_partition(const CFNumber &beta, std::size_t n, const CFNumber &alpha)
{
    if (n > alpha.depth())
        throw InsufficientDepth("q_" + std::to_string(n) + " is beyond the prefix of alpha");
    VNPartition out;
    out.n = n;
    out.qn = alpha.q(n);
    std::size_t s = 0;
    while (s < beta.depth() && beta.q(s + 1) <= out.qn)
        ++s;
    if (s + 1 >= beta.depth())
        throw InsufficientDepth("beta needs depth beyond " + std::to_string(s + 1) + " to bracket q_n = " +
                                out.qn.str());
    out.sigma = s;
    const BigInt N = 2 * out.qn;
    if (N >= beta.q(s + 1))
        throw PartitionFailed("2 q_n = " + N.str() + " is not below q'_{sigma+1} = " + beta.q(s + 1).str());
    out.count = to_i64(N);

    const KestenPartition kp = kesten_partition(beta, s, out.count);
    out.top_digit = kp.top_digit;

    std::vector<VNInterval> all;
    for (const KestenInterval &J : kp.intervals) {
        std::vector<std::int64_t> pts{J.start_point};
        pts.insert(pts.end(), J.cuts.begin(), J.cuts.end());
        pts.push_back(J.end_point);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            VNInterval v;
            v.start_point = pts[i];
            v.end_point = pts[i + 1];
            v.length = fractional_multiple(beta, v.end_point - v.start_point);
            // x -> {beta - x} sends [P_u, P_v] to [{(1-v) beta}, {(1-u) beta}].
            v.lo = fractional_multiple(beta, 1 - v.end_point);
            v.kept = i + 2 == pts.size();
            all.push_back(v);
        }
        out.removed += J.cuts.size();
    }

    // Exhaustive: no orbit point strictly inside any piece (original orientation).
    out.orbit_clear = true;
    for (const VNInterval &v : all) {
        for (std::int64_t k = 1; k <= out.count && out.orbit_clear; ++k) {
            if (k == v.start_point || k == v.end_point)
                continue;
            const RationalInterval off = fractional_multiple(beta, k - v.start_point);
            if (!(off.lower >= v.length.upper))
                out.orbit_clear = false;
        }
    }

    const BigInt &qs1 = beta.q(s + 1);
    out.max_length_bound = BigRational(beta.quotient(s + 1) + 1, qs1);
    out.max_length_holds = true;
    out.total_lower = 0;
    for (VNInterval &v : all) {
        if (!v.kept)
            continue;
        out.total_lower += v.length.lower;
        out.max_length_holds = out.max_length_holds && v.length.upper < out.max_length_bound;
        out.kept.push_back(v);
    }
    out.measure_bound = 1 - BigRational(N, qs1);
    out.sharp_measure_bound = 1 - BigRational(N - beta.q(s), qs1);
    out.measure_holds = out.total_lower >= out.measure_bound;
    return out;
}

VNStretch vn_stretch_check(const Roof &roof, const CFNumber &beta, const VNPartition &partition, std::int64_t r,
                           const BigRational &M)
{
    if (roof.is_analytic())
        throw UnsupportedRoof("stretch check expects a von Neumann roof");
    if (r < 0)
        throw InvalidArgument("r must be nonnegative");
    if (r > partition.count)
        throw DiscontinuityHit("r = " + std::to_string(r) + " exceeds the orbit length " +
                               std::to_string(partition.count) + " the partition avoids");
    const Rotation rot(beta);
    const double A = roof.slope();
    const BigRational Ar = exact_rational(A);
    // Oscillation of S_r of the smooth part over I is at most r sup|g'| |I|.
    const double lip_ac = roof.series().abs_sum(1) + roof.series().tail_bound(1);

    VNStretch out;
    out.r = r;
    out.threshold = abs(Ar) * M / 8;
    out.intervals.resize(partition.kept.size());
    parallel_for(partition.kept.size(), [&](std::size_t i) {
        const VNInterval &v = partition.kept[i];
        VNStretchInterval &o = out.intervals[i];
        const double len = to_double(mid(v.length));
        o.lo = to_double(mid(v.lo));
        o.hi = o.lo + len;
        const double eps = len * 0x1p-30;
        const Fraction xa = Fraction::from_double(o.lo + eps);
        const Fraction xb = Fraction::from_double(o.hi - eps);
        const BirkhoffValue sa = birkhoff_sum(roof, rot, xa, r);
        const BirkhoffValue sb = birkhoff_sum(roof, rot, xb, r);
        o.measured = std::abs(sb.value - sa.value);
        o.expected = std::abs(A) * static_cast<double>(r) * len;
        const double ends = std::abs(xa.value() - (o.lo + eps)) + std::abs(xb.value() - (o.hi - eps));
        const double len_width = to_double(v.length.width()) + to_double(v.lo.width());
        o.width = sa.radius + sa.truncation + sb.radius + sb.truncation +
                  std::abs(A) * static_cast<double>(r) * (2.0 * eps + ends + len_width) +
                  lip_ac * static_cast<double>(r) * len + 4.0 * kUnitRoundoff * (o.measured + o.expected);
        o.matches = std::abs(o.measured - o.expected) <= o.width;
        const BigRational lower = exact_rational(o.measured) - exact_rational(o.width);
        o.exceeds = lower > out.threshold;
    });
    out.all_match = std::all_of(out.intervals.begin(), out.intervals.end(), [](const auto &o) { return o.matches; });
    out.all_exceed = !out.intervals.empty() &&
                     std::all_of(out.intervals.begin(), out.intervals.end(), [](const auto &o) { return o.exceeds; });
    return out;
}

double gauss_kuzmin_law(std::uint64_t k)
{
    const double d = static_cast<double>(k) + 1.0;
    return -std::log2(1.0 - 1.0 / (d * d));
}

GaussKuzmin gauss_kuzmin_sample(std::size_t samples, std::size_t n, std::uint64_t seed, std::size_t workers)
{
    if (n < 1)
        throw InvalidArgument("quotient index must be at least 1");
    GaussKuzmin out;
    out.samples = samples;
    out.index = n;
    out.seed = seed;
    std::vector<std::uint8_t> bin(samples);
    // x = U / 2^127; the Euclidean algorithm on (2^127, U) yields its quotients.
    parallel_for(samples, [&](std::size_t i) {
        CounterRng rng(seed, i);
        for (;;) {
            const u128 U = ((static_cast<u128>(rng.next_u64()) << 64) | rng.next_u64()) >> 1;
            if (U == 0)
                continue;
            u128 num = static_cast<u128>(1) << 127;
            u128 den = U;
            u128 quotient = 0;
            std::size_t depth = 0;
            while (den != 0 && depth < n) {
                quotient = num / den;
                const u128 rem = num % den;
                num = den;
                den = rem;
                ++depth;
            }
            if (depth < n)
                continue; // the dyadic point ran out of quotients; redraw
            bin[i] = static_cast<std::uint8_t>(quotient > kGaussKuzminBins ? kGaussKuzminBins : quotient - 1);
            return;
        }
    }, workers);

    out.counts.assign(kGaussKuzminBins + 1, 0);
    for (std::uint8_t b : bin)
        ++out.counts[b];
    double law_sum = 0.0;
    for (std::size_t k = 1; k <= kGaussKuzminBins; ++k) {
        out.law.push_back(gauss_kuzmin_law(k));
        law_sum += out.law.back();
    }
    out.law.push_back(1.0 - law_sum);
    double tv = 0.0;
    for (std::size_t k = 0; k <= kGaussKuzminBins; ++k) {
        out.empirical.push_back(samples ? static_cast<double>(out.counts[k]) / static_cast<double>(samples) : 0.0);
        tv += std::abs(out.empirical[k] - out.law[k]);
    }
    out.tv = 0.5 * tv;
    return out;
}

std::vector<LInterval> l_intervals(const CFNumber &alpha, const BigRational &C, std::size_t eta, std::size_t j_max)
{
    if (C <= 0)
        throw InvalidArgument("C must be positive");
    if (eta < 1)
        throw InvalidArgument("eta starts at 1");
    if (eta + j_max > alpha.depth())
        throw InsufficientDepth("L intervals need a_" + std::to_string(eta + j_max) + ", depth is " +
                                std::to_string(alpha.depth()));
    std::vector<LInterval> out;
    BigInt prod = alpha.quotient(eta);
    BigInt prod1 = alpha.quotient(eta) + 1;
    for (std::size_t j = 1; j <= j_max; ++j) {
        prod *= alpha.quotient(eta + j);
        prod1 *= alpha.quotient(eta + j) + 1;
        out.push_back({j, BigRational(prod) / C - 1, C * BigRational(prod1)});
    }
    return out;
}

std::optional<std::size_t> l_membership(const std::vector<LInterval> &intervals, const BigInt &a)
{
    for (const auto &iv : intervals)
        if (iv.contains(a))
            return iv.j;
    return std::nullopt;
}

MixingShadow mixing_shadow(const CFNumber &beta, const Roof &roof, const ShadowOptions &opt)
{
    if (opt.stages < 1)
        throw InvalidArgument("at least one stage");
    MixingShadow out;
    const GapSequence gap = gap_sequence(roof, opt.stages);
    out.construction = build_alpha(beta, roof, gap, opt.stages);
    const CFNumber &alpha = out.construction.alpha;
    const Rotation rot(alpha);

    for (const StageRecord &st : out.construction.stages) {
        const double t = to_double(BigRational(beta.q(st.eta)));
        out.times.push_back(t);
        // Pieces of length |b| do not fit the arcs at desk scale; cap at half an arc.
        const std::int64_t q = to_i64(st.achieved_qn);
        const double c = std::abs(roof.series().coefficient(q));
        const std::size_t margin = std::max<std::size_t>(st.n, 8);
        const auto arcs = i_n_intervals(q, 0.0, margin);
        const double arc = arcs.empty() ? 0.0 : arcs.front().length();
        out.partitions.push_back(partition_In(roof, alpha, st.n, std::min(c, arc / 2.0), margin));
        out.reports.push_back(s1_s2_report(roof, alpha, out.partitions.back(), t));
    }
    out.trend = s1_s2_trend(out.reports);

    std::vector<Observable> family{Observable::cosine(1)};
    if (gap.entries.front().index != 1)
        family.push_back(Observable::cosine(gap.entries.front().index));
    out.scores.assign(out.times.size(), Score{-1.0, 0.0, std::numeric_limits<double>::quiet_NaN()});
    for (const Observable &g : family) {
        out.observables.push_back(g.label());
        const Diagnostics d = sequence_diagnostics(roof, rot, g, g, out.times, opt.sampling);
        for (std::size_t i = 0; i < out.times.size(); ++i)
            if (d.mixing[i].value > out.scores[i].value)
                out.scores[i] = d.mixing[i];
    }
    const double keep = 1.0 - opt.decrease;
    out.mixing_decreased = out.scores.size() >= 2;
    for (std::size_t i = 1; i < out.scores.size(); ++i) {
        const Score &a = out.scores[i - 1];
        const Score &b = out.scores[i];
        const double sigma = std::hypot(keep * a.std_error, b.std_error);
        out.mixing_decreased = out.mixing_decreased && b.value <= keep * a.value + 3.0 * sigma;
    }
    return out;
}

} // namespace ergoflow
