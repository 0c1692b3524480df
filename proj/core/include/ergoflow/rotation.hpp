#ifndef ERGOFLOW_ROTATION_HPP
#define ERGOFLOW_ROTATION_HPP

#include <ergoflow/cf_engine.hpp>
#include <ergoflow/numeric.hpp>

#include <cstdint>

namespace ergoflow
{

// Double-precision orbit arithmetic for x -> x + alpha.
//
// alpha is replaced by the convergent p/q with the largest q that fits 64 bits
// (or `precision_bits`, whichever is smaller). Phases {k (x + j alpha)} are then
// exact integer residues plus one rounding, and the true phase differs by at
// most k |j| delta where delta bounds |alpha - p/q|. Iterates with |j| >= q are
// refused: beyond that the residue order no longer matches the circle order.
class Rotation
{
public:
    explicit Rotation(const CFNumber &cf, std::size_t precision_bits = 64);

    [[nodiscard]] const CFNumber &cf() const { return cf_; }
    [[nodiscard]] std::size_t index() const { return index_; }
    [[nodiscard]] std::uint64_t p() const { return p_; }
    [[nodiscard]] std::uint64_t q() const { return q_; }
    [[nodiscard]] double delta() const { return delta_; }
    [[nodiscard]] double alpha() const { return alpha_; }

    // Largest |j| accepted by the phase functions.
    [[nodiscard]] std::uint64_t max_iterate() const { return q_ - 1; }
    void require(std::int64_t j, std::int64_t k = 1) const;

    // {j k p / q} in [0, 1).
    [[nodiscard]] double rotation_phase(std::int64_t j, std::int64_t k = 1) const;
    // {k (x + j alpha)} and its error bound.
    [[nodiscard]] double phase(const Fraction &x, std::int64_t j, std::int64_t k = 1) const;
    [[nodiscard]] double phase_error(std::int64_t j, std::int64_t k = 1) const;

private:
    CFNumber cf_;
    std::size_t index_ = 0;
    std::uint64_t p_ = 0;
    std::uint64_t q_ = 1;
    double delta_ = 0.0;
    double alpha_ = 0.0;
};

} // namespace ergoflow

#endif
