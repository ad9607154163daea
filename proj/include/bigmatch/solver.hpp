#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bigmatch/games.hpp"
#include "bigmatch/numeric.hpp"

namespace bm {

// Basic variables of the game LP in standard form: x_0..x_{m-1}, v (index m), slacks s_j (m+1+j).
using Basis = std::vector<std::size_t>;

struct GameSolution {
    Rational value;
    std::vector<Rational> x;  // row player
    std::vector<Rational> y;  // column player
    Basis basis;
};

GameSolution solve_matrix_game(const MatrixGame& A);
// min_j (x^T A)_j == value == max_i (A y)_i, with x, y distributions.
bool verify_certificate(const MatrixGame& A, const GameSolution& s);
// The bfs defined by `basis` for A, if it is feasible and optimal.
std::optional<GameSolution> basis_solution(const MatrixGame& A, const Basis& basis);
// (m+1)x(m+1) matrix of the tight constraints of `basis`, equality row last, variables (x, v).
Matrix basis_matrix(const MatrixGame& A, const Basis& basis);

// Optimal strategy sets as polytopes are used implicitly; the result is exact.
Rational marginal_value(const MatrixGame& A, const MatrixGame& B);

bool has_pure_optimal_row(const MatrixGame& A, const Rational& value);
// Throws AssumptionViolated unless derived entries are integers, value 0, and no pure optimal row.
void check_assumption(const GeneralizedBigMatch& g);
bool satisfies_assumption(const GeneralizedBigMatch& g);

struct ParametricGame {
    MatrixGame a0, a1;           // A(t) = a0 + t*a1
    Integer beta;                // common denominator
    std::size_t tau = 0;         // bit-size bound of the scaled data
    Rational t0;                 // stability threshold actually used
    Rational t0_formula;         // (4((m+1)2^(tau+1))^(2(m+1)))^-1
    bool fast = false;           // t0 came from the certified fast search
    Basis basis;
    std::vector<Polynomial> P;   // P_1..P_m for x, P_{m+1} for the scaled value
    Polynomial Q;

    MatrixGame at(const Rational& t) const;
    std::vector<Rational> x_at(const Rational& t) const;
    Rational value_at(const Rational& t) const;  // P_{m+1}(t) / (beta Q(t))
};

struct ParametricOptions {
    bool fast_thresholds = false;
    std::optional<std::size_t> tau_override;
};

Rational t0_formula(std::size_t m, std::size_t tau);
ParametricGame parametric_basis(const MatrixGame& A0, const MatrixGame& A1, const ParametricOptions& opt = {});
// Largest t in (0, probe] on which `basis` is provably optimal for A0 + tA1 (root-bound certificate), 0 if none.
Rational certified_threshold(const MatrixGame& A0, const MatrixGame& A1, const Basis& basis, const Rational& probe);
std::vector<Rational> limit_strategy(const ParametricGame& pg);

struct ExtRational {
    enum class Kind { Finite, PosInf, NegInf };
    Kind kind = Kind::Finite;
    Rational value;
    int sign() const;
    std::string str() const;
};

ExtRational delta(const AbsorbingGame& g, const Rational& u);
Rational approximate_value(const AbsorbingGame& g, const Rational& eps);

struct KohlbergPair {
    std::vector<Rational> x, x_t2;
    Rational t2;
    std::vector<Rational> omega, b, e;
    std::vector<Rational> omega_t2, b_t2, e_t2;
    ParametricGame pg;
};

struct KohlbergOptions {
    bool fast_thresholds = false;
    std::optional<std::size_t> tau_override;
    std::optional<Rational> t2_override;
};

// Column aggregates of a row mixture against g (omega_j, b_j, e_j).
void column_aggregates(const AbsorbingGame& g, const std::vector<Rational>& x, std::vector<Rational>& omega,
                       std::vector<Rational>& b, std::vector<Rational>& e);
// eta = 1/k.
KohlbergPair kohlberg_pair(const AbsorbingGame& g, const Integer& k, const KohlbergOptions& opt = {});
bool kohlberg_properties_hold(const KohlbergPair& kp, const Rational& eta);

struct ReductionOutput {
    std::size_t ell = 0;
    std::size_t orig_rows = 0, orig_cols = 0;
    Rational eps;
    Rational u;
    AbsorbingGame shifted;       // A' with rounded payoffs b'
    std::size_t tau1 = 0, tau = 0;
    Rational delta, eta, t2;
    std::vector<Rational> x, x_t2;
    std::vector<Rational> omega, b, e, omega_t2, b_t2, e_t2;
    AbsorbingGame C;
    std::vector<std::size_t> J;
    Rational v;
    AbsorbingGame Cprime;
    Integer M;
    std::optional<GeneralizedBigMatch> D;  // empty when J is empty
    Integer K;
    // -1 none, 0 always x (inner L), 1 always x(t2) (inner R)
    int pure_row = -1;
    bool fast = false;
};

struct ReduceOptions {
    bool fast_thresholds = false;
};

Integer reduction_magnitude_bound(std::size_t m, std::size_t n, std::size_t ell, std::size_t tau1);
ReductionOutput reduce(const AbsorbingGame& g, std::size_t ell, const ReduceOptions& opt = {});
std::string render_reduction(const ReductionOutput& r);
ReductionOutput parse_reduction(const std::string& text);
ReductionOutput load_reduction(const std::string& path);

}  // namespace bm
