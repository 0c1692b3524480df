#ifndef ERGOFLOW_REPORT_IO_HPP
#define ERGOFLOW_REPORT_IO_HPP

#include <ergoflow/birkhoff.hpp>
#include <ergoflow/cf_engine.hpp>
#include <ergoflow/constructor.hpp>
#include <ergoflow/flow.hpp>
#include <ergoflow/roofs.hpp>

#include <nlohmann/json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace ergoflow
{

using json = nlohmann::ordered_json;

// Malformed or incomplete definitions. Kept apart from the domain errors so
// that front-ends can tell configuration mistakes from mathematical failures.
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Integers that fit 64 bits become JSON numbers, larger ones decimal strings.
json big_to_json(const BigInt &v);
BigInt big_from_json(const json &j);
// Rationals are always "p/q" strings.
json rational_to_json(const BigRational &r);
json interval_to_json(const RationalInterval &r);

// [a_1, ..., a_n], {"quotients": [...]}, {"fixture": "fibonacci"|"beta", "depth": d},
// or {"liouville": {"seed": [...], "exponent": e, "steps": s}}.
CFNumber cf_from_json(const json &j, std::size_t int_budget_bits = kDefaultIntBudgetBits);

// {"type": "analytic", "modes": [[k, re, im], ...], "decay": {"C": .., "r": ..}},
// {"type": "vonneumann", "slope": A, "ac_modes": [...], "decay": ...}, or a
// fixture {"fixture": "r1"|"r2"|"construction"|"constant"|"single_mode", ...}.
Roof roof_from_json(const json &j);

// {"kind": "one"|"mode"|"cosine"|"cosine_below", "k": .., "h": ..} or
// {"modes": [[k, re, im], ...], "poly": [...], "cutoff": ..}.
Observable observable_from_json(const json &j);

// "p/q" strings are exact; numbers are rounded onto the 2^-52 grid.
Fraction point_from_json(const json &j);

json to_json(const CFNumber &cf);
json to_json(const KestenPartition &k);
json to_json(const BirkhoffValue &v);
json to_json(const XKernel &k);
json to_json(const DecompositionReport &d);
json to_json(const StretchReport &s);
json to_json(const CrossingBounds &c);
json to_json(const FlowPoint &p, const Rotation &rot);
json to_json(const CorrelationEstimate &c);
json to_json(const Diagnostics &d);
json to_json(const TailsReport &t);
json to_json(const GapSequence &g);
json to_json(const ConstructionReport &c);
json to_json(const PartialPartition &p);
json to_json(const S1S2Report &s);
json to_json(const VNIndices &v);
json to_json(const VNPartition &p);
json to_json(const VNStretch &s);
json to_json(const GaussKuzmin &g);
json to_json(const std::vector<LInterval> &l);
json to_json(const MixingShadow &m);

// Shortest round-trip decimal form, so CSV files are byte-stable.
std::string format_double(double v);

// t,estimate,stderr with the real part of each estimate.
void write_correlation_csv(std::ostream &os, const std::vector<CorrelationEstimate> &series);
void write_tails_csv(std::ostream &os, const TailsReport &t);
void write_histogram_csv(std::ostream &os, const GaussKuzmin &g);

} // namespace ergoflow

#endif
