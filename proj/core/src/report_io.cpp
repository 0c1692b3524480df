#include <ergoflow/fixtures.hpp>
#include <ergoflow/report_io.hpp>

#include <charconv>
#include <cmath>

namespace ergoflow
{

namespace
{

const json &need(const json &j, const char *key)
{
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(std::string("missing key \"") + key + "\"");
    return j.at(key);
}

template <class T> T get_or(const json &j, const char *key, T fallback)
{
    if (!j.is_object() || !j.contains(key))
        return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(std::string("bad value for \"") + key + "\": " + e.what());
    }
}

std::vector<std::complex<double>> modes_from_json(const json &arr, std::size_t min_size)
{
    if (!arr.is_array())
        throw ConfigError("modes must be an array of [k, re, im]");
    std::vector<std::pair<std::size_t, std::complex<double>>> items;
    std::size_t top = min_size;
    for (const json &m : arr) {
        if (!m.is_array() || m.size() < 2 || m.size() > 3)
            throw ConfigError("each mode is [k, re] or [k, re, im]");
        const auto k = m[0].get<std::int64_t>();
        if (k < 0)
            throw ConfigError("mode indices are nonnegative (c_{-k} is the conjugate)");
        const double re = m[1].get<double>();
        const double im = m.size() == 3 ? m[2].get<double>() : 0.0;
        items.emplace_back(static_cast<std::size_t>(k), std::complex<double>(re, im));
        top = std::max(top, static_cast<std::size_t>(k) + 1);
    }
    std::vector<std::complex<double>> c(top);
    for (const auto &[k, v] : items)
        c[k] = v;
    return c;
}

DecayCertificate decay_from_json(const json &j)
{
    if (!j.contains("decay"))
        return {};
    const json &d = j.at("decay");
    return {get_or<double>(d, "C", 0.0), get_or<double>(d, "r", 0.5)};
}

json complex_to_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

json enclosure_to_json(const Enclosure &e) { return {{"value", e.value}, {"radius", e.radius}}; }

json optional_rational(const std::optional<BigRational> &r) { return r ? rational_to_json(*r) : json(nullptr); }

} // namespace

json big_to_json(const BigInt &v)
{
    if (v >= 0 && v <= std::numeric_limits<std::uint64_t>::max())
        return v.convert_to<std::uint64_t>();
    if (v < 0 && v >= std::numeric_limits<std::int64_t>::min())
        return v.convert_to<std::int64_t>();
    return v.str();
}

BigInt big_from_json(const json &j)
{
    if (j.is_number_unsigned())
        return BigInt(j.get<std::uint64_t>());
    if (j.is_number_integer())
        return BigInt(j.get<std::int64_t>());
    if (j.is_string()) {
        try {
            return BigInt(j.get<std::string>());
        } catch (const std::exception &) {
            throw ConfigError("not an integer: \"" + j.get<std::string>() + "\"");
        }
    }
    throw ConfigError("expected an integer, got " + j.dump());
}

json rational_to_json(const BigRational &r) { return to_string(r); }

json interval_to_json(const RationalInterval &r)
{
    return json::array({rational_to_json(r.lower), rational_to_json(r.upper)});
}

CFNumber cf_from_json(const json &j, std::size_t budget)
{
    try {
        if (j.is_array()) {
            std::vector<BigInt> a;
            for (const json &v : j)
                a.push_back(big_from_json(v));
            return CFNumber(std::move(a), budget);
        }
        if (!j.is_object())
            throw ConfigError("a continued fraction is an array or an object");
        if (j.contains("quotients"))
            return cf_from_json(j.at("quotients"), budget);
        if (j.contains("fixture")) {
            const auto name = j.at("fixture").get<std::string>();
            if (name == "fibonacci")
                return fixtures::fibonacci(get_or<std::size_t>(j, "depth", 80));
            if (name == "beta")
                return fixtures::beta(get_or<std::size_t>(j, "depth", 5), budget);
            throw ConfigError("unknown continued-fraction fixture \"" + name + "\"");
        }
        if (j.contains("liouville")) {
            const json &l = j.at("liouville");
            const CFNumber seed = cf_from_json(need(l, "seed"), budget);
            const auto e = need(l, "exponent").get<std::uint64_t>();
            const auto steps = need(l, "steps").get<std::size_t>();
            return extend_liouville(seed, [e](std::size_t) { return e; }, steps);
        }
    } catch (const json::exception &e) {
        throw ConfigError(std::string("continued fraction: ") + e.what());
    }
    throw ConfigError("continued fraction needs quotients, fixture or liouville");
}

Roof roof_from_json(const json &j)
{
    try {
        if (!j.is_object())
            throw ConfigError("a roof is an object");
        if (j.contains("fixture")) {
            const auto name = j.at("fixture").get<std::string>();
            if (name == "r1")
                return fixtures::r1(get_or<std::size_t>(j, "cutoff", 20));
            if (name == "r2")
                return fixtures::r2();
            if (name == "construction")
                return fixtures::construction_roof();
            if (name == "constant")
                return Roof::constant_one();
            if (name == "single_mode")
                return fixtures::single_mode(need(j, "k").get<std::size_t>(), need(j, "eps").get<double>(),
                                             get_or<double>(j, "phase", 0.0));
            throw ConfigError("unknown roof fixture \"" + name + "\"");
        }
        const auto type = need(j, "type").get<std::string>();
        if (type == "analytic") {
            auto c = modes_from_json(need(j, "modes"), 1);
            return Roof::analytic(TrigSeries(std::move(c), decay_from_json(j)));
        }
        if (type == "vonneumann") {
            auto c = j.contains("ac_modes") ? modes_from_json(j.at("ac_modes"), 1)
                                            : std::vector<std::complex<double>>{0.0};
            return Roof::von_neumann(need(j, "slope").get<double>(), TrigSeries(std::move(c), decay_from_json(j)));
        }
        throw ConfigError("unknown roof type \"" + type + "\"");
    } catch (const json::exception &e) {
        throw ConfigError(std::string("roof: ") + e.what());
    }
}

Observable observable_from_json(const json &j)
{
    try {
        if (j.contains("kind")) {
            const auto kind = j.at("kind").get<std::string>();
            if (kind == "one")
                return Observable::one();
            if (kind == "mode")
                return Observable::mode(need(j, "k").get<std::int64_t>());
            if (kind == "cosine")
                return Observable::cosine(need(j, "k").get<std::int64_t>());
            if (kind == "cosine_below")
                return Observable::cosine_below(need(j, "k").get<std::int64_t>(), need(j, "h").get<double>());
            throw ConfigError("unknown observable kind \"" + kind + "\"");
        }
        std::map<std::int64_t, std::complex<double>> modes;
        for (const json &m : need(j, "modes")) {
            if (!m.is_array() || m.size() < 2)
                throw ConfigError("observable modes are [k, re, im]");
            modes[m[0].get<std::int64_t>()] = {m[1].get<double>(), m.size() > 2 ? m[2].get<double>() : 0.0};
        }
        auto poly = get_or<std::vector<double>>(j, "poly", {1.0});
        const double cut = get_or<double>(j, "cutoff", std::numeric_limits<double>::infinity());
        return Observable(std::move(modes), std::move(poly), cut, get_or<std::string>(j, "label", "custom"));
    } catch (const json::exception &e) {
        throw ConfigError(std::string("observable: ") + e.what());
    }
}

Fraction point_from_json(const json &j)
{
    if (j.is_number())
        return Fraction::from_double(j.get<double>());
    if (j.is_string()) {
        const BigRational r = [&] {
            try {
                return parse_rational(j.get<std::string>());
            } catch (const std::exception &) {
                throw ConfigError("not a rational: \"" + j.get<std::string>() + "\"");
            }
        }();
        const BigInt num = boost::multiprecision::numerator(r);
        const BigInt den = boost::multiprecision::denominator(r);
        if (den > (BigInt(1) << 62))
            throw ConfigError("point denominators must stay below 2^62");
        BigInt n = num % den;
        if (n < 0)
            n += den;
        return Fraction::make(n.convert_to<std::int64_t>(), den.convert_to<std::int64_t>());
    }
    throw ConfigError("a point is a number or a \"p/q\" string");
}

json to_json(const CFNumber &cf)
{
    json a = json::array();
    for (const BigInt &v : cf.quotients())
        a.push_back(big_to_json(v));
    json conv = json::array();
    for (std::size_t n = 0; n <= cf.depth(); ++n)
        conv.push_back({{"n", n}, {"p", big_to_json(cf.p(n))}, {"q", big_to_json(cf.q(n))}});
    return {{"quotients", a}, {"convergents", conv}, {"hull", interval_to_json(cf.hull())}};
}

json to_json(const KestenPartition &k)
{
    json iv = json::array();
    for (const KestenInterval &i : k.intervals)
        iv.push_back({{"start", i.start_point},
                      {"end", i.end_point},
                      {"class", i.length_class == GapClass::Short ? "short" : "long"},
                      {"length", interval_to_json(i.length)},
                      {"phi", i.phi()},
                      {"middle_points", i.middle_points},
                      {"tail_points", i.tail_points}});
    return {{"level", k.level},           {"count", k.count},          {"top_digit", k.top_digit},
            {"short_step", k.short_step}, {"long_step", k.long_step},  {"unit_step", k.unit_step},
            {"short_count", k.short_count}, {"long_count", k.long_count}, {"intervals", iv}};
}

json to_json(const BirkhoffValue &v)
{
    return {{"value", v.value}, {"radius", v.radius}, {"truncation", v.truncation}};
}

json to_json(const XKernel &k)
{
    json b = json::array();
    for (const KernelBound &kb : k.bounds)
        b.push_back({{"name", kb.name},
                     {"level", kb.level},
                     {"bound", kb.bound},
                     {"observed", kb.observed},
                     {"holds", kb.holds}});
    return {{"m", k.m},
            {"k", k.k},
            {"value", complex_to_json(k.value.value)},
            {"radius", k.value.radius},
            {"bounds", b},
            {"all_hold", k.all_hold()}};
}

json to_json(const DecompositionReport &d)
{
    json parts = json::array();
    for (const Enclosure &e : d.parts)
        parts.push_back(enclosure_to_json(e));
    return {{"m", d.m},
            {"n", d.n},
            {"qn", d.qn},
            {"qn1", d.qn1},
            {"tau", d.tau},
            {"x", std::to_string(d.x.num) + "/" + std::to_string(d.x.den)},
            {"parts", parts},
            {"s1_closed_form", d.s1_closed_form},
            {"s1_dominates_each", d.s1_dominates_each},
            {"s1_dominates", d.s1_dominates},
            {"total", enclosure_to_json(d.total)}};
}

json to_json(const StretchReport &s)
{
    return {{"a", s.a},
            {"b", s.b},
            {"total_stretch", s.total_stretch},
            {"endpoint_stretch", s.endpoint_stretch},
            {"epsilon", s.epsilon},
            {"resolution", s.resolution},
            {"monotone_segments", s.monotone_segments},
            {"grid_size", s.grid_size}};
}

json to_json(const CrossingBounds &c)
{
    return {{"t", c.t},
            {"lower", c.lower},
            {"upper", c.upper},
            {"t0", c.t0},
            {"window_applies", c.window_applies},
            {"window_holds", c.window_holds},
            {"range_holds", c.range_holds}};
}

json to_json(const FlowPoint &p, const Rotation &rot)
{
    return {{"base", std::to_string(p.base.num) + "/" + std::to_string(p.base.den)},
            {"shift", p.shift},
            {"x", p.x(rot)},
            {"y", p.y},
            {"radius", p.radius}};
}

json to_json(const CorrelationEstimate &c)
{
    return {{"t", c.t},
            {"estimate", complex_to_json(c.estimate)},
            {"stderr", c.std_error},
            {"accepted", c.accepted},
            {"paired_shift", complex_to_json(c.paired_shift)},
            {"paired_stderr", c.paired_std_error}};
}

json to_json(const Diagnostics &d)
{
    json series = json::array();
    for (const auto &c : d.series)
        series.push_back(to_json(c));
    auto scores = [](const std::vector<Score> &v) {
        json a = json::array();
        for (const Score &s : v)
            a.push_back({{"value", s.value}, {"stderr", s.std_error}, {"bound", s.bound}});
        return a;
    };
    return {{"series", series},
            {"inner", complex_to_json(d.inner)},
            {"product", complex_to_json(d.product)},
            {"rigidity", scores(d.rigidity)},
            {"mixing", scores(d.mixing)},
            {"rigidity_decreasing", d.rigidity_decreasing},
            {"mixing_decreasing", d.mixing_decreasing},
            {"rigidity_within_bound", d.rigidity_within_bound},
            {"proposals", d.options.proposals},
            {"seed", d.options.seed}};
}

json to_json(const TailsReport &t)
{
    json tail = json::array();
    for (const TailPoint &p : t.tail)
        tail.push_back({{"t", p.t}, {"tail", p.tail}});
    return {{"times", t.times},
            {"targets", t.targets},
            {"sup_bounds", t.sup_bounds},
            {"sample_max", t.sample_max},
            {"tail", tail},
            {"vanish_beyond", t.vanish_beyond},
            {"C", t.C},
            {"b", t.b},
            {"fitted", t.fitted},
            {"dominates", t.dominates},
            {"samples", t.samples},
            {"seed", t.seed}};
}

json to_json(const GapSequence &g)
{
    json a = json::array();
    for (const GapEntry &e : g.entries)
        a.push_back({{"index", e.index},
                     {"coefficient", e.coefficient},
                     {"weight", e.weight},
                     {"ratio", e.ratio},
                     {"tail_slack", e.tail_slack}});
    return a;
}

json to_json(const ConstructionReport &c)
{
    json stages = json::array();
    for (const StageRecord &s : c.stages)
        stages.push_back({{"stage", s.stage},
                          {"n", s.n},
                          {"intended_l", s.intended_l},
                          {"achieved_qn", big_to_json(s.achieved_qn)},
                          {"eta", s.eta},
                          {"growth_bound", big_to_json(s.growth_bound)},
                          {"achieved_qn1", big_to_json(s.achieved_qn1)},
                          {"substituted", s.substituted},
                          {"membership", s.membership},
                          {"growth", s.growth}});
    json a = json::array();
    for (const BigInt &v : c.alpha.quotients())
        a.push_back(big_to_json(v));
    return {{"alpha", a},
            {"targets", to_json(c.targets)},
            {"stages", stages},
            {"all_exact", c.all_exact()},
            {"all_growth", c.all_growth()}};
}

json to_json(const PartialPartition &p)
{
    json iv = json::array();
    for (const CircleInterval &c : p.intervals)
        iv.push_back(json::array({c.lo, c.hi}));
    return {{"id", p.id},
            {"frequency", p.frequency},
            {"level", p.level},
            {"margin", p.margin},
            {"width", p.width},
            {"components", p.components},
            {"set_measure", p.set_measure},
            {"total", p.total},
            {"endpoints_avoided", p.endpoints_avoided},
            {"intervals", iv}};
}

json to_json(const S1S2Report &s)
{
    json iv = json::array();
    for (const S1S2Interval &i : s.intervals)
        iv.push_back({{"lo", i.lo},
                      {"hi", i.hi},
                      {"n_lower", i.n_lower},
                      {"n_upper", i.n_upper},
                      {"min_derivative", i.min_derivative},
                      {"s1", i.s1},
                      {"s2", i.s2}});
    return {{"partition", s.partition_id},
            {"t", s.t},
            {"second_bound", s.second_bound},
            {"s1", s.s1},
            {"s2", s.s2},
            {"degenerate", s.degenerate},
            {"intervals", iv}};
}

json to_json(const VNIndices &v)
{
    auto list = [](const std::vector<BracketIndex> &xs) {
        json a = json::array();
        for (const BracketIndex &b : xs)
            a.push_back({{"k", b.k},
                         {"q", big_to_json(b.qk)},
                         {"sigma", b.sigma ? json(*b.sigma) : json(nullptr)},
                         {"value", optional_rational(b.value)},
                         {"witness", b.witness ? json(*b.witness) : json(nullptr)},
                         {"witness_q", b.witness ? big_to_json(b.witness_q) : json(nullptr)}});
        return a;
    };
    json table = json::array();
    for (const InterleaveEntry &e : v.table)
        table.push_back({{"q", big_to_json(e.q)}, {"source", std::string(1, e.source)}, {"index", e.index}});
    return {{"table", table}, {"M", list(v.M)}, {"N", list(v.N)}};
}

json to_json(const VNPartition &p)
{
    json kept = json::array();
    for (const VNInterval &v : p.kept)
        kept.push_back({{"start", v.start_point},
                        {"end", v.end_point},
                        {"lo", interval_to_json(v.lo)},
                        {"length", interval_to_json(v.length)}});
    return {{"n", p.n},
            {"qn", big_to_json(p.qn)},
            {"sigma", p.sigma},
            {"count", p.count},
            {"top_digit", p.top_digit},
            {"removed", p.removed},
            {"total_lower", rational_to_json(p.total_lower)},
            {"measure_bound", rational_to_json(p.measure_bound)},
            {"sharp_measure_bound", rational_to_json(p.sharp_measure_bound)},
            {"measure_holds", p.measure_holds},
            {"max_length_bound", rational_to_json(p.max_length_bound)},
            {"max_length_holds", p.max_length_holds},
            {"orbit_clear", p.orbit_clear},
            {"kept", kept}};
}

json to_json(const VNStretch &s)
{
    json iv = json::array();
    for (const VNStretchInterval &i : s.intervals)
        iv.push_back({{"lo", i.lo},
                      {"hi", i.hi},
                      {"measured", i.measured},
                      {"expected", i.expected},
                      {"width", i.width},
                      {"matches", i.matches},
                      {"exceeds", i.exceeds}});
    return {{"r", s.r},
            {"threshold", rational_to_json(s.threshold)},
            {"all_match", s.all_match},
            {"all_exceed", s.all_exceed},
            {"intervals", iv}};
}

json to_json(const GaussKuzmin &g)
{
    return {{"samples", g.samples}, {"index", g.index}, {"seed", g.seed}, {"counts", g.counts},
            {"empirical", g.empirical}, {"law", g.law}, {"tv", g.tv}};
}

json to_json(const std::vector<LInterval> &l)
{
    json a = json::array();
    for (const LInterval &i : l)
        a.push_back({{"j", i.j}, {"lower", rational_to_json(i.lower)}, {"upper", rational_to_json(i.upper)}});
    return a;
}

json to_json(const MixingShadow &m)
{
    json parts = json::array();
    for (const auto &p : m.partitions) {
        json pj = to_json(p);
        pj.erase("intervals");
        pj["pieces"] = p.intervals.size();
        parts.push_back(pj);
    }
    json reports = json::array();
    for (const auto &r : m.reports) {
        json rj = to_json(r);
        rj.erase("intervals");
        reports.push_back(rj);
    }
    json scores = json::array();
    for (std::size_t i = 0; i < m.scores.size(); ++i)
        scores.push_back({{"t", m.times[i]}, {"value", m.scores[i].value}, {"stderr", m.scores[i].std_error}});
    return {{"construction", to_json(m.construction)},
            {"times", m.times},
            {"partitions", parts},
            {"s1s2", reports},
            {"trend",
             {{"s1", m.trend.s1},
              {"s2", m.trend.s2},
              {"s1_increasing", m.trend.s1_increasing},
              {"s2_decreasing", m.trend.s2_decreasing}}},
            {"observables", m.observables},
            {"mixing", scores},
            {"mixing_decreased", m.mixing_decreased}};
}

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_correlation_csv(std::ostream &os, const std::vector<CorrelationEstimate> &series)
{
    os << "t,estimate,stderr\n";
    for (const auto &c : series)
        os << format_double(c.t) << ',' << format_double(c.estimate.real()) << ',' << format_double(c.std_error)
           << '\n';
}

void write_tails_csv(std::ostream &os, const TailsReport &t)
{
    os << "t,tail,fit\n";
    for (const TailPoint &p : t.tail)
        os << format_double(p.t) << ',' << format_double(p.tail) << ','
           << format_double(t.fitted ? t.C * std::exp(-t.b * p.t) : std::nan("")) << '\n';
}

void write_histogram_csv(std::ostream &os, const GaussKuzmin &g)
{
    os << "k,count,empirical,law\n";
    for (std::size_t i = 0; i < g.counts.size(); ++i) {
        const std::string k = i + 1 <= kGaussKuzminBins ? std::to_string(i + 1) : ">" + std::to_string(i);
        os << k << ',' << g.counts[i] << ',' << format_double(g.empirical[i]) << ',' << format_double(g.law[i])
           << '\n';
    }
}

} // namespace ergoflow
