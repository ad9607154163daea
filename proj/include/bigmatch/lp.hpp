#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "bigmatch/numeric.hpp"

namespace bm {

// maximize c.z  subject to  A z = b, z >= 0.  Exact tableau simplex, Bland's rule.
struct LPResult {
    enum class Status { Optimal, Infeasible, Unbounded };
    Status status = Status::Infeasible;
    std::vector<Rational> z;
    Rational objective;
    std::vector<std::size_t> basis;  // basic variable per row
    std::vector<Rational> duals;     // pi with B^T pi = c_B (rows dropped as redundant get 0)
};

LPResult simplex_max(const Matrix& A, const std::vector<Rational>& b, const std::vector<Rational>& c,
                     const std::optional<std::vector<std::size_t>>& start_basis = std::nullopt);

// Solve B x = rhs exactly (Gaussian elimination); nullopt if singular.
std::optional<std::vector<Rational>> solve_linear(Matrix B, std::vector<Rational> rhs);

}  // namespace bm
