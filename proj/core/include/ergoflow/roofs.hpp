#ifndef ERGOFLOW_ROOFS_HPP
#define ERGOFLOW_ROOFS_HPP

#include <ergoflow/errors.hpp>
#include <ergoflow/numeric.hpp>

#include <array>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

namespace ergoflow
{

// |c_k| <= C r^|k| for every |k| beyond the stored cutoff.
struct DecayCertificate {
    double C = 0.0;
    double r = 0.5;
};

// Value of a roof (or one of its derivatives) at a point. `radius` covers the
// floating-point evaluation of the stored modes; `truncation` bounds the modes
// beyond the cutoff that the decay certificate allows.
struct RoofValue {
    double value = 0.0;
    double radius = 0.0;
    double truncation = 0.0;

    [[nodiscard]] Enclosure model() const { return {value, radius}; }
    [[nodiscard]] Enclosure full() const { return {value, radius + truncation}; }
};

// Real trigonometric series c_0 + 2 Re sum_{1<=k<=K} c_k e(kx), c_{-k} = conj(c_k).
class TrigSeries
{
public:
    TrigSeries() : coeffs_{0.0} {}
    TrigSeries(std::vector<std::complex<double>> coeffs, DecayCertificate decay);

    static TrigSeries constant(double c0) { return TrigSeries({c0}, {}); }

    [[nodiscard]] std::size_t cutoff() const { return coeffs_.size() - 1; }
    [[nodiscard]] std::complex<double> coefficient(std::int64_t k) const;
    [[nodiscard]] const std::vector<std::complex<double>> &coefficients() const { return coeffs_; }
    // Indices k >= 1 with c_k != 0.
    [[nodiscard]] const std::vector<std::size_t> &support() const { return support_; }
    [[nodiscard]] const DecayCertificate &decay() const { return decay_; }
    [[nodiscard]] double mean() const { return coeffs_[0].real(); }

    // Derivative of the given order at phase x in [0, 1).
    [[nodiscard]] RoofValue eval(double x, int order = 0) const;
    // Same with exact phases k x for a rational point.
    [[nodiscard]] RoofValue eval(const Fraction &x, int order = 0) const;

    // sum_{k != 0, |k| <= K} |c_k| |2 pi k|^order, order 0..3.
    [[nodiscard]] double abs_sum(int order) const;
    // sum_{|k| > K} C r^|k| |2 pi k|^order.
    [[nodiscard]] double tail_bound(int order) const;
    // sum_{j >= 2, j n <= K} |c_{jn}| j n over the stored modes.
    [[nodiscard]] double multiple_weight(std::int64_t n) const;

private:
    std::vector<std::complex<double>> coeffs_;
    std::vector<std::size_t> support_;
    DecayCertificate decay_;
    std::array<double, 4> abs_{};
    std::array<double, 4> tails_{};
};

enum class RoofKind { Analytic, VonNeumann };

struct RoofCertificate {
    double mean = 0.0;
    std::size_t grid_points = 0;
    double grid_min = 0.0;
    double grid_max = 0.0;
    double interpolation_slack = 0.0;
    double tail = 0.0;
    double lower_bound = 0.0; // certified inf of the model
    double upper_bound = 0.0; // certified sup of the model
    double sawtooth_variation = 0.0;
    double variation_bound = 0.0;
};

// f(x) = A {x} + g(x) with g a trigonometric series. A = 0 gives the analytic
// roofs; A != 0 the von Neumann roofs with their single jump at x = 0.
class Roof
{
public:
    static Roof analytic(TrigSeries series);
    static Roof von_neumann(double slope, TrigSeries ac_part);
    static Roof constant_one() { return analytic(TrigSeries::constant(1.0)); }

    [[nodiscard]] RoofKind kind() const { return kind_; }
    [[nodiscard]] bool is_analytic() const { return kind_ == RoofKind::Analytic; }
    [[nodiscard]] double slope() const { return slope_; }
    [[nodiscard]] const TrigSeries &series() const { return series_; }
    [[nodiscard]] double mean() const { return slope_ / 2.0 + series_.mean(); }

    // order >= 1 at the jump raises DiscontinuityHit.
    [[nodiscard]] RoofValue eval(double x, int order = 0) const;
    [[nodiscard]] RoofValue eval(const Fraction &x, int order = 0) const;
    // Plain double evaluation for sampling loops.
    [[nodiscard]] double value(double x) const;

    // Certified bounds of the model on the whole circle.
    [[nodiscard]] double max_value() const { return cert_.upper_bound; }
    [[nodiscard]] double min_value() const { return cert_.lower_bound; }
    // sup |f'| away from the jump, including tails.
    [[nodiscard]] double lipschitz() const;
    [[nodiscard]] double variation_bound() const { return cert_.variation_bound; }
    [[nodiscard]] const RoofCertificate &grid_certificate() const { return cert_; }

    // Checks normalization and the range bounds; throws InvalidRoof with a witness.
    RoofCertificate validate() const;

private:
    Roof(RoofKind kind, double slope, TrigSeries series);

    RoofKind kind_;
    double slope_;
    TrigSeries series_;
    RoofCertificate cert_;
    double witness_min_ = 0.0;
    double witness_max_ = 0.0;
};

struct GapEntry {
    std::int64_t index = 0;
    double coefficient = 0.0; // |c_l|
    double weight = 0.0;      // T_l
    double ratio = 0.0;       // |c_l| / T_l, infinity when T_l = 0
    double tail_slack = 0.0;  // part of T_l coming from the decay certificate
};

struct GapSequence {
    std::vector<GapEntry> entries;
};

// First `count` indices with nonzero mode and strictly increasing |c_l|/T_l.
GapSequence gap_sequence(const Roof &roof, std::size_t count);

inline constexpr std::size_t kValidationGrid = std::size_t{1} << 14;

} // namespace ergoflow

#endif
