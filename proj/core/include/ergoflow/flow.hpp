#ifndef ERGOFLOW_FLOW_HPP
#define ERGOFLOW_FLOW_HPP

#include <ergoflow/birkhoff.hpp>
#include <ergoflow/roofs.hpp>
#include <ergoflow/rotation.hpp>

#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ergoflow
{

// A point of the suspension. The base is base + shift * alpha, kept exact so
// that orbits can be revisited; y is the height with its enclosure radius.
struct FlowPoint {
    Fraction base;
    std::int64_t shift = 0;
    double y = 0.0;
    double radius = 0.0;

    [[nodiscard]] double x(const Rotation &rot) const { return rot.phase(base, shift); }
};

// Requires 0 <= y < f(x). Throws InvalidArgument otherwise.
FlowPoint make_flow_point(const Roof &roof, const Rotation &rot, const Fraction &x, double y);

// T_t p: the unique n with S_n(x) <= y + t < S_{n+1}(x) gives (x + n alpha, y + t - S_n(x)).
FlowPoint flow_apply(const Roof &roof, const Rotation &rot, const FlowPoint &p, double t);

// phi(x) psi(y) with phi a trigonometric polynomial and psi(y) = P(y) on
// [0, cutoff), zero above.
class Observable
{
public:
    Observable() = default;
    Observable(std::map<std::int64_t, std::complex<double>> modes, std::vector<double> poly,
               double cutoff = std::numeric_limits<double>::infinity(), std::string label = "");

    static Observable one();
    // e(kx)
    static Observable mode(std::int64_t k);
    // cos(2 pi k x)
    static Observable cosine(std::int64_t k);
    // cos(2 pi k x) * 1_{y < h}
    static Observable cosine_below(std::int64_t k, double h);

    [[nodiscard]] std::complex<double> phi(double x) const;
    [[nodiscard]] double psi(double y) const;
    [[nodiscard]] std::complex<double> operator()(double x, double y) const { return phi(x) * psi(y); }

    [[nodiscard]] const std::map<std::int64_t, std::complex<double>> &modes() const { return modes_; }
    [[nodiscard]] const std::vector<double> &poly() const { return poly_; }
    [[nodiscard]] double cutoff() const { return cutoff_; }
    [[nodiscard]] const std::string &label() const { return label_; }

    [[nodiscard]] double sup_phi() const;
    [[nodiscard]] double lip_phi() const;
    // Bounds over [0, h] for the polynomial part.
    [[nodiscard]] double sup_psi(double h) const;
    [[nodiscard]] double lip_psi(double h) const;

private:
    std::map<std::int64_t, std::complex<double>> modes_{{0, 1.0}};
    std::vector<double> poly_{1.0};
    double cutoff_ = std::numeric_limits<double>::infinity();
    std::string label_ = "1";
};

// <g1, g2> = int g1 conj(g2) dmu^f with mu^f normalized, by quadrature in x
// and closed-form polynomial integrals in y.
std::complex<double> inner_product(const Roof &roof, const Observable &g1, const Observable &g2);
// <g, 1>
std::complex<double> observable_mean(const Roof &roof, const Observable &g);

// Proposal i of the roof sampler: x stratified over 256 cells, y uniform on
// [0, max f); nullopt when rejected. Pure function of (seed, i).
inline constexpr std::size_t kStrata = 256;
std::optional<std::pair<double, double>> sample_under_roof(const Roof &roof, std::uint64_t seed, std::uint64_t i);

struct SamplingOptions {
    std::size_t proposals = 100000; // M
    std::uint64_t seed = 0;
    std::size_t workers = 0; // 0: default_workers()
};

struct CorrelationEstimate {
    double t = 0.0;
    std::complex<double> estimate;
    double std_error = 0.0;
    std::size_t accepted = 0;
    // Paired difference against t = 0 on the same samples.
    std::complex<double> paired_shift;
    double paired_std_error = 0.0;
};

CorrelationEstimate correlate(const Roof &roof, const Rotation &rot, const Observable &g1, const Observable &g2,
                              double t, const SamplingOptions &opt);

struct Score {
    double value = 0.0;
    double std_error = 0.0;
    double bound = 0.0; // a priori bound (+3 sigma) when one is available, else NaN
};

struct Diagnostics {
    std::vector<CorrelationEstimate> series;
    std::complex<double> inner;      // <g1, g2>
    std::complex<double> product;    // <g1, 1><1, g2>
    std::vector<Score> rigidity;     // |<g1 o T_t, g2> - <g1, g2>|
    std::vector<Score> mixing;       // |<g1 o T_t, g2> - <g1,1><1,g2>|
    bool rigidity_decreasing = false;
    bool mixing_decreasing = false;
    bool rigidity_within_bound = false;
    SamplingOptions options;
};

Diagnostics sequence_diagnostics(const Roof &roof, const Rotation &rot, const Observable &g1, const Observable &g2,
                                 const std::vector<double> &times, const SamplingOptions &opt);

// sup_x |S_h f(x) - h int f| from the modes: 2 sum |c_k| |X(h, k)|, plus the
// decay tail unless only the stored model is of interest.
double mode_sup_gap(const Roof &roof, const Rotation &rot, std::int64_t h, bool include_tail = true);

struct TailPoint {
    double t = 0.0;
    double tail = 0.0; // max over n of the sampled mu{|S_{h_n} f - a_n| >= t}
};

struct TailsReport {
    std::vector<std::int64_t> times;
    std::vector<double> targets;
    std::vector<double> sup_bounds;  // certified sup_x |S_{h_n} f - a_n|
    std::vector<double> sample_max;  // largest sampled deviation per n
    std::vector<TailPoint> tail;
    double vanish_beyond = 0.0; // max of sup_bounds
    double C = 0.0;
    double b = 0.0;
    bool fitted = false;
    bool dominates = false;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
};

inline constexpr std::size_t kTailGrid = 64;

TailsReport tails_estimate(const Roof &roof, const Rotation &rot, const std::vector<std::int64_t> &times,
                           const std::vector<double> &targets, std::size_t samples, std::uint64_t seed,
                           std::size_t workers = 0);

} // namespace ergoflow

#endif
