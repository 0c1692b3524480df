#include <ergoflow/cli.hpp>
#include <ergoflow/report_io.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace ergoflow::cli
{

namespace
{

namespace fs = std::filesystem;

struct Artifact {
    std::string name;
    std::string content;
};

struct Context {
    std::string command;
    json cfg = json::object();
    std::optional<std::uint64_t> seed;
    std::size_t precision = 64;
    std::size_t budget = kDefaultIntBudgetBits;
    std::vector<Artifact> artifacts;
    json verdicts = json::object();

    const json &need(const char *key) const
    {
        if (!cfg.contains(key))
            throw ConfigError(command + ": missing key \"" + key + "\"");
        return cfg.at(key);
    }

    template <class T> T get(const char *key) const
    {
        try {
            return need(key).get<T>();
        } catch (const json::exception &e) {
            throw ConfigError(command + ": bad value for \"" + key + "\": " + e.what());
        }
    }

    template <class T> T get_or(const char *key, T fallback) const { return cfg.contains(key) ? get<T>(key) : fallback; }

    CFNumber cf(const char *key = "cf") const { return cf_from_json(need(key), budget); }
    Roof roof(const char *key = "roof") const { return roof_from_json(need(key)); }
    Rotation rotation(const CFNumber &c) const { return Rotation(c, precision); }

    std::uint64_t require_seed() const
    {
        if (!seed)
            throw ConfigError(command + " is stochastic: a seed is mandatory (--seed or \"seed\")");
        return *seed;
    }

    json meta() const
    {
        return {{"command", command},
                {"seed", seed ? json(*seed) : json(nullptr)},
                {"precision", precision},
                {"int_budget", budget},
                {"version", "0.1.0"},
                {"verdicts", verdicts}};
    }

    void add_json(const std::string &name, const json &report)
    {
        const json doc = {{"meta", meta()}, {"report", report}};
        artifacts.push_back({name, doc.dump(2) + "\n"});
    }

    void add_csv(const std::string &name, const std::string &text) { artifacts.push_back({name, text}); }
};

// Numbers, or {"convergents_of": cf, "indices": [...], "scale": s} for times
// of the form s q_n.
std::vector<double> times_from(const Context &ctx, const char *key = "times")
{
    const json &j = ctx.need(key);
    std::vector<double> out;
    try {
        if (j.is_array()) {
            for (const json &v : j)
                out.push_back(v.get<double>());
            return out;
        }
        const CFNumber c = cf_from_json(j.at("convergents_of"), ctx.budget);
        const double scale = j.contains("scale") ? j.at("scale").get<double>() : 1.0;
        for (const json &i : j.at("indices"))
            out.push_back(scale * to_double(BigRational(c.q(i.get<std::size_t>()))));
    } catch (const json::exception &e) {
        throw ConfigError(ctx.command + ": bad times: " + e.what());
    }
    return out;
}

std::vector<std::int64_t> integer_times(const Context &ctx)
{
    std::vector<std::int64_t> out;
    for (double t : times_from(ctx)) {
        if (t != std::floor(t) || std::abs(t) > 9.0e15)
            throw ConfigError(ctx.command + ": times must be integers");
        out.push_back(static_cast<std::int64_t>(t));
    }
    return out;
}

SamplingOptions sampling(const Context &ctx)
{
    SamplingOptions opt;
    opt.proposals = ctx.get_or<std::size_t>("samples", 100000);
    opt.seed = ctx.require_seed();
    return opt;
}

void cmd_cf(Context &ctx)
{
    const CFNumber c = ctx.cf();
    json rep = to_json(c);
    bool sandwich = true;
    json checks = json::array();
    // n = 0 is excluded: with a_1 = 1 we have q_0 = q_1 and the lower bound fails.
    for (std::size_t n = 1; n + 2 <= c.depth(); ++n) {
        const bool ok = verify_sandwich(c, n);
        sandwich = sandwich && ok;
        checks.push_back({{"n", n}, {"sandwich", ok}});
    }
    rep["sandwich"] = checks;
    if (ctx.cfg.contains("ostrowski")) {
        const OstrowskiDigits d = ostrowski(c, big_from_json(ctx.cfg.at("ostrowski")));
        json digits = json::array();
        for (const BigInt &v : d.digits)
            digits.push_back(big_to_json(v));
        rep["ostrowski"] = {{"target", big_to_json(d.target)}, {"digits", digits}};
    }
    ctx.verdicts["sandwich"] = sandwich;
    ctx.add_json("cf.json", rep);
}

void cmd_kesten(Context &ctx)
{
    const CFNumber c = ctx.cf();
    const auto level = ctx.get<std::size_t>("level");
    const auto count = ctx.get<std::int64_t>("count");
    const KestenPartition k = kesten_partition(c, level, count);
    ctx.verdicts["classes"] = BigInt(k.long_count) == c.q(level - 1) &&
                              BigInt(k.short_count) == c.q(level) - c.q(level - 1);
    ctx.add_json("kesten.json", to_json(k));
}

void cmd_birkhoff(Context &ctx)
{
    const CFNumber c = ctx.cf();
    const Roof roof = ctx.roof();
    const Rotation rot = ctx.rotation(c);
    json rep = json::object();
    if (ctx.cfg.contains("x")) {
        const Fraction x = point_from_json(ctx.need("x"));
        const auto n = ctx.get<std::int64_t>("n");
        const int order = ctx.get_or<int>("order", 0);
        rep["direct"] = to_json(birkhoff_sum(roof, rot, x, n, order));
        rep["fast"] = to_json(birkhoff_fast(roof, rot, x, n, order));
    }
    if (ctx.cfg.contains("kernel")) {
        const json &k = ctx.cfg.at("kernel");
        const XKernel xk = x_kernel(rot, k.at("m").get<std::int64_t>(), k.at("k").get<std::int64_t>());
        ctx.verdicts["kernel_bounds"] = xk.all_hold();
        rep["kernel"] = to_json(xk);
    }
    if (rep.empty())
        throw ConfigError("birkhoff needs \"x\" and \"n\", or \"kernel\"");
    ctx.add_json("birkhoff.json", rep);
}

void cmd_decompose(Context &ctx)
{
    const CFNumber c = ctx.cf();
    const Roof roof = ctx.roof();
    const DecompositionReport d = derivative_decomposition(roof, ctx.rotation(c), point_from_json(ctx.need("x")),
                                                           ctx.get<std::int64_t>("m"), ctx.get<std::size_t>("n"));
    ctx.verdicts["s1_dominates"] = d.s1_dominates;
    ctx.add_json("decompose.json", to_json(d));
}

void cmd_stretch(Context &ctx)
{
    const CFNumber c = ctx.cf();
    const Roof roof = ctx.roof();
    const Rotation rot = ctx.rotation(c);
    const auto a = ctx.get<double>("a");
    const auto b = ctx.get<double>("b");
    const auto n = ctx.get<std::int64_t>("n");
    const auto grid = ctx.get_or<std::size_t>("grid", 4096);
    const StretchReport s = stretch_report(
        [&](double x) { return birkhoff_fast(roof, rot, Fraction::from_double(x), n).value; }, a, b, grid);
    json rep = to_json(s);
    if (ctx.cfg.contains("t")) {
        const CrossingBounds cb =
            crossing_bounds(roof, rot, Fraction::from_double(a), Fraction::from_double(b), ctx.get<double>("t"));
        ctx.verdicts["window_holds"] = cb.window_holds;
        rep["crossings"] = to_json(cb);
    }
    ctx.add_json("stretch.json", rep);
}

void cmd_flow(Context &ctx)
{
    const CFNumber c = ctx.cf();
    const Roof roof = ctx.roof();
    const Rotation rot = ctx.rotation(c);
    const FlowPoint p = make_flow_point(roof, rot, point_from_json(ctx.need("x")), ctx.get<double>("y"));
    json pts = json::array();
    for (double t : times_from(ctx)) {
        json e = to_json(flow_apply(roof, rot, p, t), rot);
        e["t"] = t;
        pts.push_back(e);
    }
    ctx.add_json("flow.json", {{"start", to_json(p, rot)}, {"points", pts}});
}

void cmd_correlate(Context &ctx)
{
    const CFNumber c = ctx.cf();
    const Roof roof = ctx.roof();
    const Rotation rot = ctx.rotation(c);
    const Observable g1 = observable_from_json(ctx.need("g1"));
    const Observable g2 = ctx.cfg.contains("g2") ? observable_from_json(ctx.cfg.at("g2")) : g1;
    const Diagnostics d = sequence_diagnostics(roof, rot, g1, g2, times_from(ctx), sampling(ctx));
    ctx.verdicts["rigidity_decreasing"] = d.rigidity_decreasing;
    ctx.verdicts["mixing_decreasing"] = d.mixing_decreasing;
    ctx.verdicts["rigidity_within_bound"] = d.rigidity_within_bound;
    std::ostringstream csv;
    write_correlation_csv(csv, d.series);
    ctx.add_csv("correlation.csv", csv.str());
    ctx.add_json("correlation.json", to_json(d));
}

void cmd_tails(Context &ctx)
{
    const CFNumber c = ctx.cf();
    const Roof roof = ctx.roof();
    const Rotation rot = ctx.rotation(c);
    const std::vector<std::int64_t> times = integer_times(ctx);
    std::vector<double> targets;
    if (ctx.cfg.contains("targets"))
        targets = ctx.get<std::vector<double>>("targets");
    else
        for (std::int64_t h : times)
            targets.push_back(static_cast<double>(h) * roof.mean());
    const TailsReport t =
        tails_estimate(roof, rot, times, targets, ctx.get_or<std::size_t>("samples", 100000), ctx.require_seed());
    ctx.verdicts["fitted"] = t.fitted;
    ctx.verdicts["dominates"] = t.dominates;
    std::ostringstream csv;
    write_tails_csv(csv, t);
    ctx.add_json("tails.json", to_json(t));
    ctx.add_csv("tails.csv", csv.str());
}

void cmd_construct(Context &ctx)
{
    const CFNumber beta = ctx.cf("beta");
    const Roof roof = ctx.roof();
    ShadowOptions opt;
    opt.stages = ctx.get_or<std::size_t>("stages", 2);
    opt.sampling = sampling(ctx);
    const MixingShadow m = mixing_shadow(beta, roof, opt);
    ctx.verdicts["all_exact"] = m.construction.all_exact();
    ctx.verdicts["all_growth"] = m.construction.all_growth();
    ctx.verdicts["s1_increasing"] = m.trend.s1_increasing;
    ctx.verdicts["s2_decreasing"] = m.trend.s2_decreasing;
    ctx.verdicts["mixing_decreased"] = m.mixing_decreased;
    ctx.add_json("construction.json", to_json(m));
    json reports = json::array();
    for (const auto &r : m.reports)
        reports.push_back(to_json(r));
    ctx.add_json("s1s2.json", reports);
    std::vector<CorrelationEstimate> series;
    for (std::size_t i = 0; i < m.times.size(); ++i) {
        CorrelationEstimate e;
        e.t = m.times[i];
        e.estimate = m.scores[i].value;
        e.std_error = m.scores[i].std_error;
        series.push_back(e);
    }
    std::ostringstream csv;
    write_correlation_csv(csv, series);
    ctx.add_csv("correlation.csv", csv.str());
}

IndexRange range_of(const Context &ctx, const char *key)
{
    const auto v = ctx.get<std::vector<std::size_t>>(key);
    if (v.size() != 2)
        throw ConfigError(ctx.command + ": \"" + key + "\" is [lo, hi]");
    return {v[0], v[1]};
}

void cmd_vn(Context &ctx)
{
    const CFNumber alpha = ctx.cf("alpha");
    const CFNumber beta = ctx.cf("beta");
    json rep = json::object();
    std::optional<VNIndices> idx;
    if (ctx.cfg.contains("m_range")) {
        const IndexRange mr = range_of(ctx, "m_range");
        const IndexRange nr = ctx.cfg.contains("n_range") ? range_of(ctx, "n_range") : IndexRange{0, 0};
        idx = vn_indices(alpha, beta, mr, nr);
        rep["indices"] = to_json(*idx);
    }
    if (ctx.cfg.contains("partition")) {
        const json &pj = ctx.cfg.at("partition");
        const auto n = pj.at("n").get<std::size_t>();
        const VNPartition p = vn_partition(beta, n, alpha);
        ctx.verdicts["measure_holds"] = p.measure_holds;
        ctx.verdicts["orbit_clear"] = p.orbit_clear;
        json pr = to_json(p);
        if (pj.contains("roof")) {
            const Roof roof = roof_from_json(pj.at("roof"));
            BigRational M;
            if (pj.contains("M")) {
                M = parse_rational(pj.at("M").get<std::string>());
            } else {
                const auto b = bracket_indices(alpha, beta, {n, n}).front();
                if (!b.value)
                    throw ConfigError("vn: M_n is undefined for n = " + std::to_string(n) + "; give \"M\"");
                M = *b.value;
            }
            json stretches = json::array();
            bool match = true, exceed = true;
            for (const json &r : pj.at("r")) {
                const VNStretch s = vn_stretch_check(roof, beta, p, r.get<std::int64_t>(), M);
                match = match && s.all_match;
                exceed = exceed && s.all_exceed;
                stretches.push_back(to_json(s));
            }
            ctx.verdicts["stretch_matches"] = match;
            ctx.verdicts["stretch_exceeds"] = exceed;
            pr["stretch"] = stretches;
        }
        rep["partition"] = pr;
    }
    if (ctx.cfg.contains("l_intervals")) {
        const json &lj = ctx.cfg.at("l_intervals");
        const CFNumber &src = lj.value("of", std::string("alpha")) == "beta" ? beta : alpha;
        const auto L = l_intervals(src, parse_rational(lj.value("C", std::string("2"))), lj.at("eta").get<std::size_t>(),
                                   lj.at("j_max").get<std::size_t>());
        json lr = {{"intervals", to_json(L)}};
        if (lj.contains("candidate")) {
            const auto j = l_membership(L, big_from_json(lj.at("candidate")));
            lr["member_j"] = j ? json(*j) : json(nullptr);
            // K of the j <= K ln C scan, calibrated on fixtures.
            const double K = lj.value("K", 3.0);
            const double C = to_double(parse_rational(lj.value("C", std::string("2"))));
            lr["j_limit"] = std::ceil(K * std::log(C));
            ctx.verdicts["candidate_in_L"] = j.has_value() && static_cast<double>(*j) <= std::ceil(K * std::log(C));
        }
        rep["l_intervals"] = lr;
    }
    if (rep.empty())
        throw ConfigError("vn needs m_range, partition or l_intervals");
    ctx.add_json("vn.json", rep);
}

void cmd_gauss_kuzmin(Context &ctx)
{
    const GaussKuzmin g = gauss_kuzmin_sample(ctx.get_or<std::size_t>("samples", 1000000),
                                              ctx.get_or<std::size_t>("index", 15), ctx.require_seed());
    ctx.verdicts["tv_within_0.01"] = g.tv <= 0.01;
    std::ostringstream csv;
    write_histogram_csv(csv, g);
    ctx.add_csv("gauss_kuzmin.csv", csv.str());
    ctx.add_json("gauss_kuzmin.json", to_json(g));
}

std::string read_file(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// index.json over every artifact in dir, in name order.
int cmd_bundle(const fs::path &dir, std::ostream &out)
{
    if (!fs::is_directory(dir))
        throw InvalidArgument("bundle: " + dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto &e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        const auto ext = e.path().extension().string();
        if (e.is_regular_file() && name != "index.json" && (ext == ".json" || ext == ".csv"))
            files.push_back(e.path());
    }
    if (files.empty())
        throw InvalidArgument("bundle: no artifacts in " + dir.string());
    std::sort(files.begin(), files.end());
    json entries = json::array();
    for (const fs::path &f : files) {
        const std::string text = read_file(f);
        json e = {{"file", f.filename().string()}};
        if (f.extension() == ".csv") {
            e["kind"] = "csv";
            e["rows"] = std::max<std::ptrdiff_t>(0, std::count(text.begin(), text.end(), '\n') - 1);
        } else {
            e["kind"] = "json";
            const json doc = json::parse(text, nullptr, false);
            if (doc.is_object() && doc.contains("meta")) {
                const json &m = doc.at("meta");
                for (const char *k : {"command", "seed", "precision", "int_budget", "verdicts"})
                    if (m.contains(k))
                        e[k] = m.at(k);
            } else {
                e["meta"] = nullptr;
            }
        }
        entries.push_back(e);
    }
    const json index = {{"count", entries.size()}, {"artifacts", entries}};
    std::ofstream(dir / "index.json", std::ios::binary) << index.dump(2) << "\n";
    out << index.dump(2) << "\n";
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Experiments on rotations, Birkhoff sums and suspension flows", "ergoflow"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::uint64_t seed = 0;
    std::size_t precision = 64;
    std::size_t budget = kDefaultIntBudgetBits;
    std::string out_dir;
    app.add_option("--config", config_path, "JSON experiment config");
    auto *seed_opt = app.add_option("--seed", seed, "seed for stochastic commands");
    app.add_option("--precision", precision, "working precision of orbit arithmetic in bits (<= 64)");
    app.add_option("--int-budget", budget, "bit budget for continued-fraction integers");
    app.add_option("--out", out_dir, "write artifacts to this directory");

    std::string quotients;
    auto *cf_cmd = app.add_subcommand("cf", "convergent table of a prefix");
    cf_cmd->add_option("--quotients", quotients, "comma-separated partial quotients");
    const std::vector<std::pair<const char *, const char *>> simple = {
        {"kesten", "three-gap / Kesten structure of an orbit segment"},
        {"birkhoff", "Birkhoff sums and the X(m, k) kernel"},
        {"decompose", "six-term decomposition of S_m(f')"},
        {"stretch", "stretch report of S_n f on an interval"},
        {"flow", "apply the suspension flow to a point"},
        {"correlate", "correlation series, rigidity and mixing scores"},
        {"tails", "tail estimates of S_h f - a"},
        {"construct", "two-stage construction with (S1)/(S2) and mixing scores"},
        {"vn", "von Neumann indices, partitions and stretch"},
        {"gauss-kuzmin", "law of a deep partial quotient"}};
    for (const auto &[name, desc] : simple)
        app.add_subcommand(name, desc);
    std::string bundle_dir;
    auto *bundle_cmd = app.add_subcommand("bundle", "index every artifact of a run directory");
    bundle_cmd->add_option("dir", bundle_dir, "run directory (defaults to --out)");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "ConfigError: " << e.what() << "\n";
        return kExitConfig;
    }

    Context ctx;
    ctx.command = app.get_subcommands().front()->get_name();
    try {
        if (ctx.command == "bundle") {
            const std::string dir = bundle_dir.empty() ? out_dir : bundle_dir;
            if (dir.empty())
                throw ConfigError("bundle needs a directory");
            return cmd_bundle(dir, out);
        }
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in)
                throw ConfigError("cannot read config " + config_path);
            try {
                ctx.cfg = json::parse(in);
            } catch (const json::parse_error &e) {
                throw ConfigError("malformed JSON in " + config_path + ": " + e.what());
            }
            if (!ctx.cfg.is_object())
                throw ConfigError("config must be a JSON object");
        }
        if (!quotients.empty()) {
            json a = json::array();
            std::stringstream ss(quotients);
            for (std::string tok; std::getline(ss, tok, ',');)
                a.push_back(tok);
            ctx.cfg["cf"] = a;
        }
        if (seed_opt->count() > 0)
            ctx.seed = seed;
        else if (ctx.cfg.contains("seed"))
            ctx.seed = ctx.get<std::uint64_t>("seed");
        ctx.precision = ctx.cfg.contains("precision") && app.get_option("--precision")->count() == 0
                            ? ctx.get<std::size_t>("precision")
                            : precision;
        ctx.budget = ctx.cfg.contains("int_budget") && app.get_option("--int-budget")->count() == 0
                         ? ctx.get<std::size_t>("int_budget")
                         : budget;
        if (out_dir.empty() && ctx.cfg.contains("out"))
            out_dir = ctx.get<std::string>("out");

        if (ctx.command == "cf")
            cmd_cf(ctx);
        else if (ctx.command == "kesten")
            cmd_kesten(ctx);
        else if (ctx.command == "birkhoff")
            cmd_birkhoff(ctx);
        else if (ctx.command == "decompose")
            cmd_decompose(ctx);
        else if (ctx.command == "stretch")
            cmd_stretch(ctx);
        else if (ctx.command == "flow")
            cmd_flow(ctx);
        else if (ctx.command == "correlate")
            cmd_correlate(ctx);
        else if (ctx.command == "tails")
            cmd_tails(ctx);
        else if (ctx.command == "construct")
            cmd_construct(ctx);
        else if (ctx.command == "vn")
            cmd_vn(ctx);
        else if (ctx.command == "gauss-kuzmin")
            cmd_gauss_kuzmin(ctx);
        (void)cf_cmd;
    } catch (const ConfigError &e) {
        err << "ConfigError: " << e.what() << "\n";
        return kExitConfig;
    } catch (const json::exception &e) {
        err << "ConfigError: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error &e) {
        err << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception &e) {
        err << "Error: " << e.what() << "\n";
        return kExitDomain;
    }

    try {
        if (out_dir.empty()) {
            out << ctx.artifacts.front().content;
        } else {
            fs::create_directories(out_dir);
            json written = json::array();
            for (const Artifact &a : ctx.artifacts) {
                std::ofstream(fs::path(out_dir) / a.name, std::ios::binary) << a.content;
                written.push_back(a.name);
            }
            out << json{{"artifacts", written}}.dump() << "\n";
        }
    } catch (const std::exception &e) {
        err << "IOError: " << e.what() << "\n";
        return kExitDomain;
    }
    return kExitOk;
}

} // namespace ergoflow::cli
