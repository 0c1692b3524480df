#include <ergoflow/fixtures.hpp>

namespace ergoflow::fixtures
{

CFNumber fibonacci(std::size_t depth) { return CFNumber(std::vector<BigInt>(depth, BigInt(1))); }

CFNumber beta(std::size_t depth, std::size_t int_budget_bits)
{
    std::vector<BigInt> a;
    for (std::size_t n = 1; n <= depth; ++n)
        a.push_back(BigInt(1) << (std::size_t{1} << (n - 1)));
    return CFNumber(std::move(a), int_budget_bits);
}

Roof r1(std::size_t cutoff)
{
    std::vector<std::complex<double>> c(cutoff + 1);
    c[0] = 1.0;
    double v = 0.25;
    for (std::size_t k = 1; k <= cutoff; ++k) {
        v *= 0.5;
        c[k] = v;
    }
    return Roof::analytic(TrigSeries(std::move(c), {0.25, 0.5}));
}

Roof r2() { return Roof::von_neumann(1.0, TrigSeries::constant(0.5)); }

Roof single_mode(std::size_t k, double eps, double phase)
{
    std::vector<std::complex<double>> c(k + 1);
    c[0] = 1.0;
    c[k] = std::polar(eps, phase);
    return Roof::analytic(TrigSeries(std::move(c), {}));
}

Roof construction_roof()
{
    std::vector<std::complex<double>> c(301);
    c[0] = 1.0;
    c[3] = 0.14;
    c[298] = 0.02;
    return Roof::analytic(TrigSeries(std::move(c), {0.25, 0.5}));
}

} // namespace ergoflow::fixtures
