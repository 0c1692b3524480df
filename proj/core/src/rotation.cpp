#include <ergoflow/rotation.hpp>

#include <cmath>

namespace ergoflow
{

Rotation::Rotation(const CFNumber &cf, std::size_t precision_bits) : cf_(cf)
{
    if (cf.depth() == 0)
        throw InsufficientDepth("rotation needs at least one partial quotient");
    const std::size_t cap = std::min<std::size_t>(precision_bits, 64);
    if (cap < 2)
        throw InvalidArgument("precision below 2 bits");
    index_ = 0;
    for (std::size_t n = 0; n <= cf.depth(); ++n)
        if (bit_length(cf.q(n)) <= cap)
            index_ = n;
    p_ = cf.p(index_).convert_to<std::uint64_t>();
    q_ = cf.q(index_).convert_to<std::uint64_t>();

    BigRational err;
    if (index_ == cf.depth())
        err = cf.hull().width();
    else
        err = BigRational(BigInt(1), cf.q(index_) * cf.q(index_ + 1));
    delta_ = to_double(err) * (1.0 + 0x1p-50);
    alpha_ = to_double((cf.hull().lower + cf.hull().upper) / 2);
}

void Rotation::require(std::int64_t j, std::int64_t k) const
{
    const u128 prod = static_cast<u128>(j < 0 ? -static_cast<i128>(j) : j) *
                      static_cast<u128>(k < 0 ? -static_cast<i128>(k) : k);
    if (prod >= q_)
        throw InsufficientDepth("orbit index " + std::to_string(j) + " x frequency " + std::to_string(k) +
                                " needs q > product; working convergent has q = " + std::to_string(q_) +
                                " (extend the prefix)");
}

double Rotation::rotation_phase(std::int64_t j, std::int64_t k) const
{
    const i128 jk = static_cast<i128>(j) * k;
    i128 r = jk % static_cast<i128>(q_);
    if (r < 0)
        r += q_;
    const u128 res = (static_cast<u128>(r) * p_) % q_;
    return static_cast<double>(static_cast<std::uint64_t>(res)) / static_cast<double>(q_);
}

double Rotation::phase(const Fraction &x, std::int64_t j, std::int64_t k) const
{
    double v = x.scaled_phase(k) + rotation_phase(j, k);
    if (v >= 1.0)
        v -= 1.0;
    return v;
}

double Rotation::phase_error(std::int64_t j, std::int64_t k) const
{
    const double jk = std::abs(static_cast<double>(j)) * std::abs(static_cast<double>(k));
    return jk * delta_ * (1.0 + 0x1p-50) + 0x1p-51;
}

} // namespace ergoflow
