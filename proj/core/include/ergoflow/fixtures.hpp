#ifndef ERGOFLOW_FIXTURES_HPP
#define ERGOFLOW_FIXTURES_HPP

#include <ergoflow/cf_engine.hpp>
#include <ergoflow/roofs.hpp>

namespace ergoflow::fixtures
{

// [0; 1, 1, 1, ...], the golden rotation.
CFNumber fibonacci(std::size_t depth = 80);

// a_n = 2^(2^(n-1)): q' = 1, 2, 9, 146, 37385, 2450063506, ...
CFNumber beta(std::size_t depth = 5, std::size_t int_budget_bits = kDefaultIntBudgetBits);

// c_0 = 1, c_k = 0.25 * 0.5^k for 1 <= k <= K, decay certificate C = 0.25, r = 0.5.
Roof r1(std::size_t cutoff = 20);

// f(x) = {x} + 1/2.
Roof r2();

// 1 + 2 eps cos(2 pi k x + phase): a single mode c_k = eps e^{i phase}.
Roof single_mode(std::size_t k, double eps, double phase = 0.0);

// Sparse roof for the two-stage construction: c_3 = 0.14, c_298 = 0.02,
// cutoff 300 with decay certificate C = 0.25, r = 0.5.
Roof construction_roof();

} // namespace ergoflow::fixtures

#endif
