#include "bigmatch/suites.hpp"

#include "bigmatch/errors.hpp"
#include "bigmatch/rng.hpp"
#include "bigmatch/sim.hpp"

namespace bm {

namespace {

struct Stream {
    std::uint64_t seed, n = 0;
    long uniform(long lo, long hi) {
        std::uint64_t span = static_cast<std::uint64_t>(hi - lo + 1);
        return lo + static_cast<long>(splitmix64(seed + 0x9e3779b97f4a7c15ULL * ++n) % span);
    }
};

MatrixGame combine(const MatrixGame& a, const MatrixGame& b, const Rational& t) {
    Matrix out = a.a;
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = 0; j < out[i].size(); ++j) out[i][j] += t * b(i, j);
    return MatrixGame(std::move(out));
}

std::string tag(const std::string& what, std::size_t k) { return what + " #" + std::to_string(k); }

// Right-hand slope at 0 of P / (beta Q).
std::optional<Rational> slope_at_zero(const Polynomial& P, const Polynomial& Q, const Integer& beta) {
    long q = lowest_nonzero(Q);
    if (q < 0) return std::nullopt;
    auto c = [](const Polynomial& p, long k) { return k >= 0 && k <= p.degree() ? p[k] : Rational(0); };
    for (long k = 0; k < q; ++k)
        if (c(P, k) != 0) return std::nullopt;
    Rational p0 = c(P, q), p1 = c(P, q + 1), q0 = c(Q, q), q1 = c(Q, q + 1);
    return (p1 * q0 - p0 * q1) / (Rational(beta) * q0 * q0);
}

bool has_saddle(const MatrixGame& A) {
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) {
            bool ok = true;
            for (std::size_t k = 0; k < A.cols() && ok; ++k) ok = A(i, j) <= A(i, k);
            for (std::size_t k = 0; k < A.rows() && ok; ++k) ok = A(i, j) >= A(k, j);
            if (ok) return true;
        }
    return false;
}

}  // namespace

MatrixGame random_matrix_game(std::uint64_t seed, std::size_t m, std::size_t n, long lo, long hi) {
    Stream s{seed};
    Matrix a(m, std::vector<Rational>(n));
    for (auto& row : a)
        for (auto& x : row) x = s.uniform(lo, hi);
    return MatrixGame(std::move(a));
}

MatrixGame random_rational_game(std::uint64_t seed, std::size_t m, std::size_t n, long lo, long hi, long max_den) {
    Stream s{seed};
    Matrix a(m, std::vector<Rational>(n));
    for (auto& row : a)
        for (auto& x : row) {
            x = Rational(s.uniform(lo, hi), static_cast<unsigned long>(s.uniform(1, max_den)));
            x.canonicalize();
        }
    return MatrixGame(std::move(a));
}

SuiteResult suite_base_lemma(unsigned stop_power) {
    SuiteResult r;
    r.name = "base-lemma";
    const std::vector<Rational> xis{Rational(1, 2), Rational(1, 4)};
    for (const auto& g : {big_match(), zero_value_big_match()}) {
        auto v = verify_base_lemma(make_generalized(g), 3, 8, xis, stop_power);
        r.checks += 4 * 2 * 510;
        r.violations.insert(r.violations.end(), v.begin(), v.end());
    }
    return r;
}

SuiteResult suite_lp(std::size_t games, std::uint64_t seed) {
    SuiteResult r;
    r.name = "lp";
    MatrixGame zv({{1, -1}, {-1, 1}});
    auto s = solve_matrix_game(zv);
    ++r.checks;
    if (s.value != 0 || s.x != std::vector<Rational>{Rational(1, 2), Rational(1, 2)} || !verify_certificate(zv, s))
        r.violations.push_back("zero-value derived game");
    for (std::size_t k = 0; k < games; ++k) {
        MatrixGame A = random_matrix_game(splitmix64(seed * 1000 + k), 3, 4, -5, 5);
        auto sol = solve_matrix_game(A);
        ++r.checks;
        if (!verify_certificate(A, sol)) r.violations.push_back(tag("certificate", k));
        auto again = basis_solution(A, sol.basis);
        ++r.checks;
        if (!again || again->value != sol.value) r.violations.push_back(tag("basis re-solve", k));
    }
    return r;
}

SuiteResult suite_parametric(std::size_t families, std::uint64_t seed) {
    SuiteResult r;
    r.name = "parametric";
    for (std::size_t k = 0; k < families; ++k) {
        std::size_t m = 2 + k % 2, n = 2 + k % 3;
        MatrixGame A0 = random_rational_game(splitmix64(seed * 1000 + 2 * k), m, n, -5, 5, 4);
        MatrixGame A1 = random_rational_game(splitmix64(seed * 1000 + 2 * k + 1), m, n, -5, 5, 4);
        ParametricGame pg = parametric_basis(A0, A1, {true, std::nullopt});
        Rational t = pg.t0;
        for (int d = 0; d <= 3; ++d, t /= 2) {
            ++r.checks;
            auto s = basis_solution(pg.at(t), pg.basis);
            if (!s) {
                r.violations.push_back(tag("basis not optimal at t0/" + std::to_string(1 << d), k));
                continue;
            }
            if (s->value != pg.value_at(t) || s->x != pg.x_at(t) || !verify_certificate(pg.at(t), *s))
                r.violations.push_back(tag("basis polynomials disagree at t0/" + std::to_string(1 << d), k));
        }
    }
    return r;
}

MillsReport suite_mills(std::size_t games, std::uint64_t seed) {
    MillsReport rep;
    for (std::size_t k = 0; k < games; ++k) {
        MatrixGame A = random_matrix_game(splitmix64(seed * 1000 + 2 * k), 3, 4, -5, 5);
        MatrixGame B = random_matrix_game(splitmix64(seed * 1000 + 2 * k + 1), 3, 4, -5, 5);
        ++rep.games;
        if (has_saddle(A)) ++rep.saddle_games;
        const Rational v0 = solve_matrix_game(A).value;
        const Rational mv = marginal_value(A, B);
        ParametricGame pg = parametric_basis(A, B, {true, std::nullopt});
        bool literal = true, identity = true;
        Rational a = pg.t0;
        for (int d = 0; d < 3; ++d, a /= 2) {
            Rational va = solve_matrix_game(combine(A, B, a)).value;
            if (va - v0 != a * mv) literal = false;
            if (va != pg.value_at(a)) identity = false;
        }
        auto slope = slope_at_zero(pg.P.back(), pg.Q, pg.beta);
        if (!literal) {
            ++rep.literal_failures;
            rep.notes.push_back(tag("nonlinear", k) + ": marginal " + to_string(mv) + ", value along basis " +
                                to_string(pg.value_at(pg.t0)) + " at t0");
        }
        if (!identity) ++rep.identity_failures;
        if (!slope || *slope != mv) ++rep.derivative_failures;
    }
    return rep;
}

SuiteResult audit_reduction(const ReductionOutput& r) {
    SuiteResult out;
    out.name = "reduction";
    ++out.checks;
    if (!kohlberg_properties_hold(
            KohlbergPair{r.x, r.x_t2, r.t2, r.omega, r.b, r.e, r.omega_t2, r.b_t2, r.e_t2, {}}, r.eta))
        out.violations.push_back("Kohlberg pair properties");
    if (!r.D) {
        ++out.checks;
        if (r.pure_row != 0 || !r.J.empty()) out.violations.push_back("empty J must play x");
        return out;
    }
    ++out.checks;
    try {
        check_assumption(*r.D);
    } catch (const AssumptionViolated& e) {
        out.violations.push_back(e.what());
    }
    Integer bound = reduction_magnitude_bound(r.orig_rows, r.orig_cols, r.ell, r.tau1);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < r.D->game.cols(); ++j) {
            ++out.checks;
            if (abs(r.D->game.pi[i][j]) > bound)
                out.violations.push_back("entry (" + std::to_string(i) + "," + std::to_string(j) + ") above bound");
        }
    ++out.checks;
    for (const auto& row : r.D->derived.a)
        for (const auto& x : row)
            if (x.get_den() != 1) {
                out.violations.push_back("derived entry " + to_string(x) + " is not an integer");
                return out;
            }
    return out;
}

SuiteResult suite_reduction(std::size_t ell, bool fast) {
    ReduceOptions o;
    o.fast_thresholds = fast;
    return audit_reduction(reduce(big_match(), ell, o));
}

}  // namespace bm
