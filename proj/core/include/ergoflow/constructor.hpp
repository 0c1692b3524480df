#ifndef ERGOFLOW_CONSTRUCTOR_HPP
#define ERGOFLOW_CONSTRUCTOR_HPP

#include <ergoflow/birkhoff.hpp>
#include <ergoflow/cf_engine.hpp>
#include <ergoflow/flow.hpp>
#include <ergoflow/roofs.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ergoflow
{

// Smallest eta with q'_eta > 2 k^2 / |c_{l_k}|^2, where l_k is the k-th gap
// index (k >= 1). Exact comparison; InsufficientDepth when beta runs out.
std::size_t eta_index(std::size_t k, const GapSequence &gap, const CFNumber &beta);
// The threshold itself, exact.
BigRational eta_threshold(std::size_t k, const GapSequence &gap);

struct StageRecord {
    std::size_t stage = 0; // m, from 1
    std::size_t n = 0;     // convergent index with q_n = achieved_qn
    std::int64_t intended_l = 0;
    BigInt achieved_qn;
    std::size_t eta = 0;
    BigInt growth_bound; // 2 q'_eta n^2
    BigInt achieved_qn1;
    bool substituted = false;
    bool membership = false; // q_n == l_m
    bool growth = false;     // q_{n+1} > growth_bound
};

struct ConstructionReport {
    CFNumber alpha;
    GapSequence targets;
    std::vector<StageRecord> stages;

    [[nodiscard]] bool all_exact() const;
    [[nodiscard]] bool all_growth() const;
};

struct ConstructionOptions {
    std::vector<BigInt> seed; // prefix to start from
    std::size_t padding = 40; // ones appended after the last stage
};

// Greedy forward builder: for stage m append the quotient that makes q_n = l_m
// (or the nearest reachable denominator with a nonzero stored mode, flagged),
// then a_{n+1} = floor((2 q'_eta n^2 - q_{n-1}) / q_n) + 1.
ConstructionReport build_alpha(const CFNumber &beta, const Roof &roof, const GapSequence &gap, std::size_t stages,
                               const ConstructionOptions &opt = {});

struct PartialPartition {
    std::string id;
    std::vector<CircleInterval> intervals;
    double width = 0.0;         // requested piece length
    double set_measure = 0.0;   // measure of the arcs that were cut
    double total = 0.0;         // measure of the pieces
    std::size_t components = 0; // arcs
    std::size_t level = 0;      // convergent index of the frequency
    std::size_t margin = 0;     // I_margin was used
    std::int64_t frequency = 0;
    // No endpoint set for analytic roofs; kept for the record.
    bool endpoints_avoided = true;
};

// Cuts each arc into floor(L / width) equal pieces, each in [width, 2 width).
// PartitionFailed when width is not positive or exceeds the shortest arc.
PartialPartition partition_arcs(const std::vector<CircleInterval> &arcs, double width);

// Partition of I_margin built on the frequency q_n of alpha. width defaults to
// |c_{q_n}|; margin 0 means max(n, 8), since I_n is empty for n <= 4.
PartialPartition partition_In(const Roof &roof, const CFNumber &alpha, std::size_t n,
                              std::optional<double> width = std::nullopt, std::size_t margin = 0);

struct S1S2Interval {
    double lo = 0.0;
    double hi = 0.0;
    std::int64_t n_lower = 0;
    std::int64_t n_upper = 0;
    double min_derivative = 0.0; // certified lower end of min |S_r f'| on the grid
    double s1 = 0.0;             // min_derivative |I|
    double s2 = 0.0;             // 2t sup|f''| |I| / min_derivative
};

struct S1S2Report {
    std::string partition_id;
    double t = 0.0;
    double second_bound = 0.0; // 2t sup|f''|, the naive C m bound at m = 2t
    std::vector<S1S2Interval> intervals;
    double s1 = 0.0; // min over intervals
    double s2 = 0.0; // max over intervals
    bool degenerate = false; // s1 == 0: no stretching to speak of
};

inline constexpr std::size_t kS1GridX = 9;
inline constexpr std::size_t kS1GridR = 129;

S1S2Report s1_s2_report(const Roof &roof, const CFNumber &alpha, const PartialPartition &partition, double t);

struct S1S2Trend {
    std::vector<double> s1;
    std::vector<double> s2;
    bool s1_increasing = false;
    bool s2_decreasing = false;
};

S1S2Trend s1_s2_trend(const std::vector<S1S2Report> &reports);

// M_k for the sequence a inside the brackets of b (N_k with the roles swapped).
struct BracketIndex {
    std::size_t k = 0;
    BigInt qk;
    std::optional<std::size_t> sigma; // q'_sigma < q_k < q'_{sigma+1}; empty on equality
    std::optional<BigRational> value; // empty when no q_r lies strictly inside
    std::optional<std::size_t> witness;
    BigInt witness_q;
};

struct InterleaveEntry {
    BigInt q;
    char source = 'a'; // 'a' for alpha, 'b' for beta
    std::size_t index = 0;
};

struct IndexRange {
    std::size_t lo = 0;
    std::size_t hi = 0;
};

struct VNIndices {
    std::vector<InterleaveEntry> table;
    std::vector<BracketIndex> M; // alpha indices in beta brackets
    std::vector<BracketIndex> N; // beta indices in alpha brackets
};

std::vector<BracketIndex> bracket_indices(const CFNumber &a, const CFNumber &b, IndexRange range);
VNIndices vn_indices(const CFNumber &alpha, const CFNumber &beta, IndexRange m_range, IndexRange n_range);

// One sub-interval of a Kesten interval J_r, reflected by x -> {beta - x} so
// that x + j beta avoids 0 for 0 <= j < count on its interior.
struct VNInterval {
    std::int64_t start_point = 0; // orbit index k of the left end before reflection
    std::int64_t end_point = 0;
    RationalInterval lo; // enclosure of the left end after reflection
    RationalInterval length;
    bool kept = false;
};

struct VNPartition {
    std::size_t n = 0;
    BigInt qn;
    std::size_t sigma = 0;
    std::int64_t count = 0; // 2 q_n
    std::int64_t top_digit = 0;
    std::vector<VNInterval> kept;
    std::size_t removed = 0;
    BigRational total_lower;
    BigRational measure_bound;       // 1 - 2 q_n / q'_{sigma+1}
    BigRational sharp_measure_bound; // 1 - (2 q_n - q'_sigma) / q'_{sigma+1}
    bool measure_holds = false;
    BigRational max_length_bound; // (a'_{sigma+1} + 1) / q'_{sigma+1}
    bool max_length_holds = false;
    bool orbit_clear = false; // no {k beta}, 1 <= k <= count, inside any piece
};

VNPartition vn_partition(const CFNumber &beta, std::size_t n, const CFNumber &alpha);

struct VNStretchInterval {
    double lo = 0.0;
    double hi = 0.0;
    double measured = 0.0; // S_r f(hi-) - S_r f(lo+)
    double expected = 0.0; // A r |I|
    double width = 0.0;    // enclosure half-width of the comparison
    bool matches = false;
    bool exceeds = false;
};

struct VNStretch {
    std::int64_t r = 0;
    BigRational threshold; // A M / 8
    std::vector<VNStretchInterval> intervals;
    bool all_match = false;
    bool all_exceed = false;
};

VNStretch vn_stretch_check(const Roof &roof, const CFNumber &beta, const VNPartition &partition, std::int64_t r,
                           const BigRational &M);

inline constexpr std::size_t kGaussKuzminBins = 20;

struct GaussKuzmin {
    std::size_t samples = 0;
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> counts; // k = 1..20, then the tail k > 20
    std::vector<double> empirical;
    std::vector<double> law;
    double tv = 0.0;
};

// -log2(1 - 1/(k+1)^2)
double gauss_kuzmin_law(std::uint64_t k);

GaussKuzmin gauss_kuzmin_sample(std::size_t samples, std::size_t n, std::uint64_t seed, std::size_t workers = 0);

struct LInterval {
    std::size_t j = 0;
    BigRational lower; // prod a / C - 1
    BigRational upper; // C prod (a + 1)

    [[nodiscard]] bool contains(const BigInt &a) const { return lower <= a && BigRational(a) <= upper; }
};

// Products over a_eta .. a_{eta+j}, j = 1..j_max.
std::vector<LInterval> l_intervals(const CFNumber &alpha, const BigRational &C, std::size_t eta, std::size_t j_max);
// Smallest j whose interval contains a, if any.
std::optional<std::size_t> l_membership(const std::vector<LInterval> &intervals, const BigInt &a);

// Two-stage (or more) pipeline: construction, partitions, (S1)/(S2), and
// mixing scores at the constructed times.
struct ShadowOptions {
    std::size_t stages = 2;
    SamplingOptions sampling;
    double decrease = 0.25; // required relative drop of the mixing score
};

struct MixingShadow {
    ConstructionReport construction;
    std::vector<double> times;
    std::vector<PartialPartition> partitions;
    std::vector<S1S2Report> reports;
    S1S2Trend trend;
    std::vector<std::string> observables;
    std::vector<Score> scores; // max over the observable family, per stage
    bool mixing_decreased = false;
};

MixingShadow mixing_shadow(const CFNumber &beta, const Roof &roof, const ShadowOptions &opt);

} // namespace ergoflow

#endif
