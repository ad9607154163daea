#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bigmatch/solver.hpp"

namespace bm {

struct SuiteResult {
    std::string name;
    std::size_t checks = 0;
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

// Random integer matrix with entries in [lo, hi], from a counter-based stream.
MatrixGame random_matrix_game(std::uint64_t seed, std::size_t m, std::size_t n, long lo, long hi);
// Random rational matrix: numerators in [lo, hi], denominators in [1, max_den].
MatrixGame random_rational_game(std::uint64_t seed, std::size_t m, std::size_t n, long lo, long hi, long max_den);

// Both base-strategy lemmas on the Big Match and its zero-value variant, i <= 3, words <= 8, xi in {1/2, 1/4}.
SuiteResult suite_base_lemma(unsigned stop_power = 4);
// Exact certificates for random games plus the zero-value derived game.
SuiteResult suite_lp(std::size_t games = 25, std::uint64_t seed = 1);
// The optimal basis at the probe re-verifies at t0/2, t0/4, t0/8 with the basis value polynomial.
SuiteResult suite_parametric(std::size_t families = 25, std::uint64_t seed = 2);

struct MillsReport {
    std::size_t games = 0;
    std::size_t literal_failures = 0;     // val(A+aB) - val(A) != a * marginal
    std::size_t identity_failures = 0;    // val(A+aB) != value along the stable basis
    std::size_t derivative_failures = 0;  // slope of the basis value at 0 != marginal
    std::size_t saddle_games = 0;         // games with a pure saddle point
    std::vector<std::string> notes;
};
MillsReport suite_mills(std::size_t games = 25, std::uint64_t seed = 3);

// Assumption on D, the entry-magnitude bound, and the Kohlberg-pair properties.
SuiteResult audit_reduction(const ReductionOutput& r);
SuiteResult suite_reduction(std::size_t ell = 4, bool fast = true);

}  // namespace bm
