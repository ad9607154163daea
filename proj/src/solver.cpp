#include "bigmatch/solver.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "bigmatch/errors.hpp"
#include "bigmatch/lp.hpp"

namespace bm {

namespace {

Rational min_entry(const MatrixGame& A) {
    Rational lo = A(0, 0);
    for (const auto& row : A.a)
        for (const auto& x : row) lo = std::min(lo, x);
    return lo;
}

MatrixGame combine(const MatrixGame& A0, const MatrixGame& A1, const Rational& t) {
    Matrix a = A0.a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += t * A1(i, j);
    return MatrixGame(std::move(a));
}

MatrixGame scaled(const MatrixGame& A, const Integer& beta) {
    Matrix a = A.a;
    for (auto& row : a)
        for (auto& x : row) x *= beta;
    return MatrixGame(std::move(a));
}

// Standard-form column of variable k for game A (rows: n column constraints, then the equality).
std::vector<Rational> std_column(const MatrixGame& A, std::size_t k) {
    const std::size_t m = A.rows(), n = A.cols();
    std::vector<Rational> col(n + 1, Rational(0));
    if (k < m) {
        for (std::size_t j = 0; j < n; ++j) col[j] = A(k, j);
        col[n] = 1;
    } else if (k == m) {
        for (std::size_t j = 0; j < n; ++j) col[j] = -1;
    } else {
        col[k - m - 1] = -1;
    }
    return col;
}

Matrix std_basis_matrix(const MatrixGame& A, const Basis& basis) {
    const std::size_t n = A.cols();
    Matrix B(n + 1, std::vector<Rational>(basis.size()));
    for (std::size_t c = 0; c < basis.size(); ++c) {
        auto col = std_column(A, basis[c]);
        for (std::size_t r = 0; r <= n; ++r) B[r][c] = col[r];
    }
    return B;
}

}  // namespace

GameSolution solve_matrix_game(const MatrixGame& A) {
    const std::size_t m = A.rows(), n = A.cols();
    Rational lo = min_entry(A);
    Rational shift = lo < 1 ? Rational(1 - lo) : Rational(0);

    const std::size_t N = m + 1 + n;
    Matrix M(n + 1, std::vector<Rational>(N, Rational(0)));
    std::vector<Rational> rhs(n + 1, Rational(0));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) M[j][i] = A(i, j) + shift;
        M[j][m] = -1;
        M[j][m + 1 + j] = -1;
    }
    for (std::size_t i = 0; i < m; ++i) M[n][i] = 1;
    rhs[n] = 1;
    std::vector<Rational> c(N, Rational(0));
    c[m] = 1;

    // Start from the best pure row.
    std::size_t best_row = 0, best_col = 0;
    Rational best_val;
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t jmin = 0;
        for (std::size_t j = 1; j < n; ++j)
            if (A(i, j) < A(i, jmin)) jmin = j;
        if (i == 0 || A(i, jmin) > best_val) {
            best_val = A(i, jmin);
            best_row = i;
            best_col = jmin;
        }
    }
    Basis start{best_row, m};
    for (std::size_t j = 0; j < n; ++j)
        if (j != best_col) start.push_back(m + 1 + j);

    LPResult res = simplex_max(M, rhs, c, start);
    if (res.status != LPResult::Status::Optimal) throw Error("matrix game LP did not reach an optimum");

    GameSolution s;
    s.value = res.z[m] - shift;
    s.x.assign(res.z.begin(), res.z.begin() + static_cast<long>(m));
    s.y.resize(n);
    for (std::size_t j = 0; j < n; ++j) s.y[j] = -res.duals[j];
    s.basis = res.basis;
    std::sort(s.basis.begin(), s.basis.end());
    return s;
}

bool verify_certificate(const MatrixGame& A, const GameSolution& s) {
    const std::size_t m = A.rows(), n = A.cols();
    if (s.x.size() != m || s.y.size() != n) return false;
    Rational sx(0), sy(0);
    for (const auto& v : s.x) {
        if (v < 0) return false;
        sx += v;
    }
    for (const auto& v : s.y) {
        if (v < 0) return false;
        sy += v;
    }
    if (sx != 1 || sy != 1) return false;
    Rational lo, hi;
    for (std::size_t j = 0; j < n; ++j) {
        Rational acc(0);
        for (std::size_t i = 0; i < m; ++i) acc += s.x[i] * A(i, j);
        if (j == 0 || acc < lo) lo = acc;
    }
    for (std::size_t i = 0; i < m; ++i) {
        Rational acc(0);
        for (std::size_t j = 0; j < n; ++j) acc += A(i, j) * s.y[j];
        if (i == 0 || acc > hi) hi = acc;
    }
    return lo == s.value && hi == s.value;
}

std::optional<GameSolution> basis_solution(const MatrixGame& A, const Basis& basis) {
    const std::size_t m = A.rows(), n = A.cols();
    if (basis.size() != n + 1 || std::find(basis.begin(), basis.end(), m) == basis.end()) return std::nullopt;
    Matrix B = std_basis_matrix(A, basis);
    std::vector<Rational> rhs(n + 1, Rational(0));
    rhs[n] = 1;
    auto z = solve_linear(B, rhs);
    if (!z) return std::nullopt;
    std::vector<Rational> full(m + 1 + n, Rational(0));
    for (std::size_t c = 0; c < basis.size(); ++c) full[basis[c]] = (*z)[c];
    for (std::size_t k = 0; k < full.size(); ++k)
        if (k != m && full[k] < 0) return std::nullopt;

    Matrix BT = transpose(B);
    std::vector<Rational> cb(basis.size(), Rational(0));
    for (std::size_t c = 0; c < basis.size(); ++c)
        if (basis[c] == m) cb[c] = 1;
    auto pi = solve_linear(BT, cb);
    if (!pi) return std::nullopt;
    GameSolution s;
    s.y.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        s.y[j] = -(*pi)[j];
        if (s.y[j] < 0) return std::nullopt;
    }
    for (std::size_t i = 0; i < m; ++i) {
        Rational d = (*pi)[n];
        for (std::size_t j = 0; j < n; ++j) d -= A(i, j) * s.y[j];
        if (d < 0) return std::nullopt;
    }
    s.value = full[m];
    s.x.assign(full.begin(), full.begin() + static_cast<long>(m));
    s.basis = basis;
    return s;
}

Matrix basis_matrix(const MatrixGame& A, const Basis& basis) {
    const std::size_t m = A.rows(), n = A.cols();
    std::vector<bool> basic(m + 1 + n, false);
    for (auto k : basis) basic[k] = true;
    Matrix M;
    for (std::size_t k = 0; k < m + 1 + n; ++k) {
        if (basic[k] || k == m) continue;
        std::vector<Rational> row(m + 1, Rational(0));
        if (k < m) {
            row[k] = -1;
        } else {
            std::size_t j = k - m - 1;
            for (std::size_t i = 0; i < m; ++i) row[i] = -A(i, j);
            row[m] = 1;
        }
        M.push_back(std::move(row));
    }
    std::vector<Rational> eq(m + 1, Rational(1));
    eq[m] = 0;
    M.push_back(std::move(eq));
    if (M.size() != m + 1) throw DegenerateBasis("basis does not select m+1 tight constraints");
    return M;
}

Rational marginal_value(const MatrixGame& A, const MatrixGame& B) {
    const std::size_t m = A.rows(), n = A.cols();
    if (B.rows() != m || B.cols() != n) throw InvalidInput("marginal value needs equal shapes");
    const Rational v = solve_matrix_game(A).value;

    // Variables: x (m), p (m), w+, w-, r (n), s (n).
    const std::size_t X = 0, P = m, WP = 2 * m, WM = 2 * m + 1, R = 2 * m + 2, S = 2 * m + 2 + n;
    const std::size_t N = S + n;
    Matrix M;
    std::vector<Rational> rhs;
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<Rational> row(N, Rational(0));
        row[WP] = 1;
        row[WM] = -1;
        for (std::size_t i = 0; i < m; ++i) {
            row[P + i] = -A(i, j);
            row[X + i] = -B(i, j);
        }
        row[R + j] = 1;
        M.push_back(std::move(row));
        rhs.push_back(0);
    }
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<Rational> row(N, Rational(0));
        for (std::size_t i = 0; i < m; ++i) row[X + i] = A(i, j);
        row[S + j] = -1;
        M.push_back(std::move(row));
        rhs.push_back(v);
    }
    {
        std::vector<Rational> row(N, Rational(0));
        for (std::size_t i = 0; i < m; ++i) row[X + i] = 1;
        M.push_back(std::move(row));
        rhs.push_back(1);
    }
    std::vector<Rational> c(N, Rational(0));
    c[WP] = 1;
    c[WM] = -1;
    for (std::size_t i = 0; i < m; ++i) c[P + i] = -v;

    LPResult res = simplex_max(M, rhs, c);
    if (res.status != LPResult::Status::Optimal) throw Error("marginal value LP did not reach an optimum");
    return res.objective;
}

bool has_pure_optimal_row(const MatrixGame& A, const Rational& value) {
    for (const auto& row : A.a)
        if (*std::min_element(row.begin(), row.end()) >= value) return true;
    return false;
}

void check_assumption(const GeneralizedBigMatch& g) {
    for (const auto& row : g.derived.a)
        for (const auto& x : row)
            if (x.get_den() != 1) throw AssumptionViolated("derived entries must be integers");
    auto s = solve_matrix_game(g.derived);
    if (s.value != 0) throw AssumptionViolated("derived game value is " + to_string(s.value) + ", not 0");
    if (has_pure_optimal_row(g.derived, s.value))
        throw AssumptionViolated("row player has a pure optimal strategy in the derived game");
}

bool satisfies_assumption(const GeneralizedBigMatch& g) {
    try {
        check_assumption(g);
        return true;
    } catch (const AssumptionViolated&) {
        return false;
    }
}

// ---------------------------------------------------------------- parametric games

MatrixGame ParametricGame::at(const Rational& t) const { return combine(a0, a1, t); }

std::vector<Rational> ParametricGame::x_at(const Rational& t) const {
    Rational q = poly_eval(Q, t);
    if (q == 0) throw DegenerateBasis("Q vanishes at the requested point");
    std::vector<Rational> x;
    for (std::size_t i = 0; i + 1 < P.size(); ++i) x.push_back(poly_eval(P[i], t) / q);
    return x;
}

Rational ParametricGame::value_at(const Rational& t) const {
    Rational q = poly_eval(Q, t);
    if (q == 0) throw DegenerateBasis("Q vanishes at the requested point");
    return poly_eval(P.back(), t) / (Rational(beta) * q);
}

Rational t0_formula(std::size_t m, std::size_t tau) {
    Integer base = Integer(static_cast<unsigned long>(m + 1)) * ipow(Integer(2), tau + 1);
    return Rational(Integer(1), 4 * ipow(base, 2 * (m + 1)));
}

namespace {

struct Scaling {
    Integer beta;
    std::size_t tau;
    MatrixGame s0, s1;
};

Scaling scale_family(const MatrixGame& A0, const MatrixGame& A1) {
    std::vector<Rational> all;
    for (const auto& row : A0.a) all.insert(all.end(), row.begin(), row.end());
    for (const auto& row : A1.a) all.insert(all.end(), row.begin(), row.end());
    Scaling s;
    s.beta = lcm_of_denominators(all);
    s.s0 = scaled(A0, s.beta);
    s.s1 = scaled(A1, s.beta);
    s.tau = 1;
    for (const auto* g : {&s.s0, &s.s1})
        for (const auto& row : g->a)
            for (const auto& x : row) s.tau = std::max(s.tau, bit_size(x.get_num()));
    return s;
}

std::vector<Rational> sample_points(std::size_t count) {
    std::vector<Rational> pts;
    for (std::size_t k = 0; k < count; ++k) pts.emplace_back(static_cast<long>(k));
    return pts;
}

}  // namespace

Rational certified_threshold(const MatrixGame& A0, const MatrixGame& A1, const Basis& basis, const Rational& probe) {
    const std::size_t m = A0.rows(), n = A0.cols();
    Scaling sc = scale_family(A0, A1);
    const std::size_t deg = m + 2;
    auto pts = sample_points(deg + 1);

    std::vector<bool> basic(m + 1 + n, false);
    for (auto k : basis) basic[k] = true;
    if (!basic[m]) return Rational(0);

    std::vector<std::vector<std::pair<Rational, Rational>>> series;  // one per tracked polynomial
    std::vector<std::pair<Rational, Rational>> qser;
    std::vector<std::size_t> nonbasic;
    for (std::size_t k = 0; k < m + 1 + n; ++k)
        if (!basic[k]) nonbasic.push_back(k);
    series.resize(basis.size() + nonbasic.size());

    // Sample where the basis matrix is nonsingular; Q has degree <= m, so m + 1 zeros mean Q = 0.
    std::size_t zeros = 0;
    for (long k = 0; qser.size() < pts.size(); ++k) {
        Rational t(k);
        MatrixGame S = combine(sc.s0, sc.s1, t);
        Matrix B = std_basis_matrix(S, basis);
        Rational q = determinant(B);
        if (q == 0) {
            if (++zeros > m) return Rational(0);
            continue;
        }
        qser.emplace_back(t, q);
        std::vector<Rational> rhs(n + 1, Rational(0));
        rhs[n] = 1;
        auto z = solve_linear(B, rhs);
        std::vector<Rational> cb(basis.size(), Rational(0));
        for (std::size_t c = 0; c < basis.size(); ++c)
            if (basis[c] == m) cb[c] = 1;
        auto pi = solve_linear(transpose(B), cb);
        for (std::size_t c = 0; c < basis.size(); ++c) series[c].emplace_back(t, (*z)[c] * q);
        for (std::size_t r = 0; r < nonbasic.size(); ++r) {
            auto col = std_column(S, nonbasic[r]);
            Rational d(nonbasic[r] == m ? 1 : 0);
            for (std::size_t i = 0; i <= n; ++i) d -= (*pi)[i] * col[i];
            series[basis.size() + r].emplace_back(t, d * q);
        }
    }

    Rational tc = probe;
    auto tighten = [&](const Polynomial& f) {
        if (f.is_zero()) return;
        for (const auto& c : f.coeffs)
            if (c.get_den() != 1) throw Error("certificate polynomial is not integral");
        tc = std::min(tc, root_magnitude_bounds(f).first);
    };
    Polynomial Q = interpolate(qser, deg);
    if (Q.is_zero()) return Rational(0);
    tighten(Q);
    for (std::size_t c = 0; c < series.size(); ++c) {
        if (c < basis.size() && basis[c] == m) continue;  // v is free
        tighten(interpolate(series[c], deg));
    }
    if (basis_solution(combine(A0, A1, tc), basis)) return tc;
    return Rational(0);
}

ParametricGame parametric_basis(const MatrixGame& A0, const MatrixGame& A1, const ParametricOptions& opt) {
    if (A0.rows() != A1.rows() || A0.cols() != A1.cols()) throw InvalidInput("parametric family shape mismatch");
    const std::size_t m = A0.rows();
    Scaling sc = scale_family(A0, A1);

    ParametricGame pg;
    pg.a0 = A0;
    pg.a1 = A1;
    pg.beta = sc.beta;
    pg.tau = opt.tau_override.value_or(sc.tau);
    pg.t0_formula = t0_formula(m, pg.tau);

    bool found = false;
    if (opt.fast_thresholds) {
        Rational probe(1, 2);
        for (int attempt = 0; attempt < 256 && probe > pg.t0_formula; ++attempt, probe /= 2) {
            auto s = solve_matrix_game(combine(A0, A1, probe));
            Rational tc = certified_threshold(A0, A1, s.basis, probe);
            if (tc > 0) {
                pg.t0 = std::max(tc, pg.t0_formula);
                pg.basis = s.basis;
                if (pg.t0 != tc && !basis_solution(combine(A0, A1, pg.t0), pg.basis)) continue;
                pg.fast = true;
                found = true;
                break;
            }
        }
    }
    if (!found) {
        pg.t0 = pg.t0_formula;
        pg.basis = solve_matrix_game(combine(A0, A1, pg.t0)).basis;
    }

    auto pts = sample_points(m + 2);
    std::vector<std::vector<std::pair<Rational, Rational>>> pser(m + 1);
    std::vector<std::pair<Rational, Rational>> qser;
    for (const auto& t : pts) {
        Matrix M = basis_matrix(combine(sc.s0, sc.s1, t), pg.basis);
        qser.emplace_back(t, determinant(M));
        for (std::size_t i = 0; i <= m; ++i) {
            Matrix Mi = M;
            for (std::size_t r = 0; r <= m; ++r) Mi[r][i] = (r == m) ? 1 : 0;
            pser[i].emplace_back(t, determinant(Mi));
        }
    }
    pg.Q = interpolate(qser, m + 1);
    for (auto& s : pser) pg.P.push_back(interpolate(s, m + 1));
    return pg;
}

std::vector<Rational> limit_strategy(const ParametricGame& pg) {
    long d = lowest_nonzero(pg.Q);
    if (d < 0) throw DegenerateBasis("Q is identically zero");
    const Rational& qd = pg.Q.coeffs[static_cast<std::size_t>(d)];
    std::vector<Rational> x;
    for (std::size_t i = 0; i + 1 < pg.P.size(); ++i) {
        const auto& p = pg.P[i];
        Rational a = static_cast<std::size_t>(d) < p.coeffs.size() ? p.coeffs[static_cast<std::size_t>(d)] : Rational(0);
        x.push_back(a / qd);
    }
    return x;
}

// ---------------------------------------------------------------- value characterization

int ExtRational::sign() const {
    if (kind == Kind::PosInf) return 1;
    if (kind == Kind::NegInf) return -1;
    return sgn(value);
}

std::string ExtRational::str() const {
    if (kind == Kind::PosInf) return "+inf";
    if (kind == Kind::NegInf) return "-inf";
    return to_string(value);
}

ExtRational delta(const AbsorbingGame& g, const Rational& u) {
    AuxiliarySplit split = auxiliary_split(g, u);
    Rational v0 = solve_matrix_game(split.a1).value;
    ExtRational out;
    if (v0 > u) {
        out.kind = ExtRational::Kind::PosInf;
    } else if (v0 < u) {
        out.kind = ExtRational::Kind::NegInf;
    } else {
        out.value = marginal_value(split.a1, split.a2);
    }
    return out;
}

Rational approximate_value(const AbsorbingGame& g, const Rational& eps) {
    if (eps <= 0) throw InvalidParameter("approximate_value needs eps > 0");
    Rational lo = g.pi[0][0], hi = g.pi[0][0];
    for (const auto& row : g.pi)
        for (const auto& x : row) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    while (hi - lo > 2 * eps) {
        Rational mid = (lo + hi) / 2;
        if (delta(g, mid).sign() >= 0)
            lo = mid;
        else
            hi = mid;
    }
    return (lo + hi) / 2;
}

// ---------------------------------------------------------------- Kohlberg pair

void column_aggregates(const AbsorbingGame& g, const std::vector<Rational>& x, std::vector<Rational>& omega,
                       std::vector<Rational>& b, std::vector<Rational>& e) {
    const std::size_t m = g.rows(), n = g.cols();
    omega.assign(n, Rational(0));
    b.assign(n, Rational(0));
    e.assign(n, Rational(0));
    for (std::size_t j = 0; j < n; ++j) {
        Rational w(0), wb(0), rb(0);
        for (std::size_t i = 0; i < m; ++i) {
            w += x[i] * g.omega[i][j];
            wb += x[i] * g.omega[i][j] * g.pi[i][j];
            rb += x[i] * (1 - g.omega[i][j]) * g.pi[i][j];
        }
        omega[j] = w;
        if (w > 0) b[j] = wb / w;
        if (w < 1) e[j] = rb / (1 - w);
    }
}

bool kohlberg_properties_hold(const KohlbergPair& kp, const Rational& eta) {
    for (std::size_t j = 0; j < kp.omega.size(); ++j) {
        if (kp.omega[j] > 0) {
            if (!(kp.omega_t2[j] > 0) || !(abs(kp.b[j] - kp.b_t2[j]) < eta)) return false;
        } else {
            if (!(kp.omega_t2[j] < eta) || !(abs(kp.e[j] - kp.e_t2[j]) < eta)) return false;
        }
    }
    return true;
}

KohlbergPair kohlberg_pair(const AbsorbingGame& g, const Integer& k, const KohlbergOptions& opt) {
    if (k <= 0) throw InvalidParameter("eta = 1/k needs a positive integer k");
    const std::size_t m = g.rows();
    AuxiliarySplit split = auxiliary_split(g, Rational(0));
    KohlbergPair kp;
    kp.pg = parametric_basis(split.a1, split.a2, {opt.fast_thresholds, opt.tau_override});
    kp.x = limit_strategy(kp.pg);
    column_aggregates(g, kp.x, kp.omega, kp.b, kp.e);
    const Rational eta(Integer(1), k);

    auto fill_at = [&](const Rational& t) {
        kp.t2 = t;
        kp.x_t2 = kp.pg.x_at(t);
        column_aggregates(g, kp.x_t2, kp.omega_t2, kp.b_t2, kp.e_t2);
    };

    Integer base = Integer(static_cast<unsigned long>(m + 1)) * ipow(Integer(2), kp.pg.tau + 1);
    Rational formula(Integer(1), 6 * k * ipow(base, 2 * (m + 1)));
    if (opt.t2_override) {
        fill_at(*opt.t2_override);
        return kp;
    }
    if (kp.pg.fast) {
        Rational t = kp.pg.t0;
        for (int a = 0; a < 4096 && t > formula; ++a, t /= 2) {
            fill_at(t);
            if (kohlberg_properties_hold(kp, eta)) return kp;
        }
    }
    fill_at(std::min(formula, kp.pg.t0));
    return kp;
}

// ---------------------------------------------------------------- reduction

Integer reduction_magnitude_bound(std::size_t m, std::size_t n, std::size_t ell, std::size_t tau1) {
    Integer base = 24 * Integer(static_cast<unsigned long>(m + 2)) * ipow(Integer(2), ell + tau1 + 1);
    return ipow(base, 20 * (m + 2) * (m + 2) * (2 * n + 1));
}

ReductionOutput reduce(const AbsorbingGame& g, std::size_t ell, const ReduceOptions& opt) {
    for (const auto& row : g.pi)
        for (const auto& x : row)
            if (abs(x) > 1) throw InvalidInput("stage payoffs must satisfy |b| <= 1, found " + to_string(x));
    if (ell == 0) throw InvalidInput("eps = 2^-l needs l >= 1");

    ReductionOutput r;
    const std::size_t m = g.rows(), n = g.cols();
    r.ell = ell;
    r.orig_rows = m;
    r.orig_cols = n;
    r.fast = opt.fast_thresholds;
    r.eps = Rational(Integer(1), ipow(Integer(2), ell));
    const Rational& eps = r.eps;

    Rational w = approximate_value(g, eps / 16);
    r.u = w - 5 * eps / 8;
    if (delta(g, r.u + eps / 2).sign() < 0 || delta(g, r.u + 23 * eps / 32).sign() >= 0)
        throw Error("value bracket u + eps/2 <= val < u + 3eps/4 failed its sign test");

    Matrix bp = g.pi;
    const Rational step = eps / 4;
    for (auto& row : bp)
        for (auto& x : row) x = Rational(floor((x - r.u) / step)) * step;
    r.shifted = AbsorbingGame(bp, g.omega);

    std::vector<Rational> ws;
    for (const auto& row : g.omega) ws.insert(ws.end(), row.begin(), row.end());
    Integer beta1 = lcm_of_denominators(ws);
    r.tau1 = std::max<std::size_t>(1, bit_size(beta1));
    for (const auto& x : ws) r.tau1 = std::max(r.tau1, bit_size(Integer(x * beta1)));
    r.tau = r.tau1 + ell + 3;

    Integer base = Integer(static_cast<unsigned long>(m + 1)) * ipow(Integer(2), r.tau + 1);
    Rational delta_formula(Integer(1), ipow(base, 2 * m + 3));
    Rational val00 = solve_matrix_game(auxiliary_game(r.shifted, 0, 0)).value;
    r.delta = val00 > 0 ? std::min(val00, delta_formula) : delta_formula;
    r.eta = r.delta / 4;
    Integer k = ceil(1 / r.eta);

    KohlbergOptions ko;
    ko.fast_thresholds = opt.fast_thresholds;
    ko.tau_override = r.tau;
    if (!opt.fast_thresholds) ko.t2_override = Rational(Integer(1), 24 * ipow(base, 4 * (m + 1)));
    KohlbergPair kp = kohlberg_pair(r.shifted, k, ko);
    if (!kohlberg_properties_hold(kp, Rational(Integer(1), k)))
        throw Error("Kohlberg pair properties failed at t2 = " + to_string(kp.t2));
    if (solve_matrix_game(auxiliary_game(r.shifted, 0, kp.t2)).value < r.delta * kp.t2)
        throw Error("val(A'(0,t2)) >= delta t2 failed");

    r.t2 = kp.t2;
    r.x = kp.x;
    r.x_t2 = kp.x_t2;
    r.omega = kp.omega;
    r.b = kp.b;
    r.e = kp.e;
    r.omega_t2 = kp.omega_t2;
    r.b_t2 = kp.b_t2;
    r.e_t2 = kp.e_t2;

    Matrix cpi(2, std::vector<Rational>(n)), cw(2, std::vector<Rational>(n, Rational(0)));
    for (std::size_t j = 0; j < n; ++j) {
        if (r.omega[j] > 0) {
            cpi[0][j] = r.b[j];
            cw[0][j] = r.omega[j];
        } else {
            cpi[0][j] = r.e[j];
        }
        if (r.omega_t2[j] > 0) {
            cpi[1][j] = r.b_t2[j];
            cw[1][j] = r.omega_t2[j];
        } else {
            cpi[1][j] = r.e_t2[j];
        }
    }
    r.C = AbsorbingGame(cpi, cw);

    for (std::size_t j = 0; j < n; ++j)
        if (r.omega[j] == 0 && r.omega_t2[j] > 0) r.J.push_back(j);
    if (r.J.empty()) {
        r.pure_row = 0;
        r.M = 1;
        r.K = 0;
        return r;
    }

    Matrix ct(2, std::vector<Rational>(r.J.size()));
    for (std::size_t c = 0; c < r.J.size(); ++c) {
        ct[0][c] = r.e[r.J[c]];
        ct[1][c] = r.omega_t2[r.J[c]] * r.b_t2[r.J[c]];
    }
    r.v = solve_matrix_game(MatrixGame(ct)).value;

    Matrix ppi(2, std::vector<Rational>(r.J.size())), pw(2, std::vector<Rational>(r.J.size(), Rational(0)));
    std::vector<Rational> dens;
    for (std::size_t c = 0; c < r.J.size(); ++c) {
        std::size_t j = r.J[c];
        ppi[0][c] = r.e[j] - r.v;
        ppi[1][c] = r.b_t2[j] - r.v / r.omega_t2[j];
        pw[1][c] = r.omega_t2[j];
        dens.push_back(ppi[0][c]);
        dens.push_back(pw[1][c] * ppi[1][c]);
    }
    r.Cprime = AbsorbingGame(ppi, pw);
    r.M = lcm_of_denominators(dens);
    Matrix dpi = ppi;
    for (auto& row : dpi)
        for (auto& x : row) x *= r.M;
    r.D = make_generalized(AbsorbingGame(dpi, pw));
    r.K = r.D->K;

    auto sol = solve_matrix_game(r.D->derived);
    if (sol.value != 0) throw Error("reduced derived game has value " + to_string(sol.value));
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& row = r.D->derived.a[i];
        if (*std::min_element(row.begin(), row.end()) >= 0) {
            r.pure_row = static_cast<int>(i);
            break;
        }
    }
    return r;
}

// ---------------------------------------------------------------- reduction record

namespace {

std::string join(const std::vector<Rational>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ' ';
        s += to_string(xs[i]);
    }
    return s;
}

std::vector<Rational> split_rationals(const std::string& rest) {
    std::istringstream in(rest);
    std::vector<Rational> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_rational(tok));
    return out;
}

}  // namespace

std::string render_reduction(const ReductionOutput& r) {
    std::ostringstream out;
    out << "reduction 1\n";
    out << "ell " << r.ell << "\n";
    out << "eps " << to_string(r.eps) << "\n";
    out << "orig " << r.orig_rows << " " << r.orig_cols << "\n";
    out << "u " << to_string(r.u) << "\n";
    out << "tau1 " << r.tau1 << "\n";
    out << "tau " << r.tau << "\n";
    out << "delta " << to_string(r.delta) << "\n";
    out << "eta " << to_string(r.eta) << "\n";
    out << "t2 " << to_string(r.t2) << "\n";
    out << "x " << join(r.x) << "\n";
    out << "x_t2 " << join(r.x_t2) << "\n";
    out << "omega " << join(r.omega) << "\n";
    out << "b " << join(r.b) << "\n";
    out << "e " << join(r.e) << "\n";
    out << "omega_t2 " << join(r.omega_t2) << "\n";
    out << "b_t2 " << join(r.b_t2) << "\n";
    out << "e_t2 " << join(r.e_t2) << "\n";
    out << "J";
    for (auto j : r.J) out << " " << j;
    out << "\n";
    out << "v " << to_string(r.v) << "\n";
    out << "M " << r.M.get_str() << "\n";
    out << "K " << r.K.get_str() << "\n";
    out << "pure " << r.pure_row << "\n";
    out << "fast " << (r.fast ? 1 : 0) << "\n";
    out << "game shifted\n" << render_game(r.shifted) << "end\n";
    out << "game C\n" << render_game(r.C) << "end\n";
    if (r.D) {
        out << "game Cprime\n" << render_game(r.Cprime) << "end\n";
        out << "game D\n" << render_game(r.D->game) << "end\n";
    }
    return out.str();
}

ReductionOutput parse_reduction(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    ReductionOutput r;
    std::map<std::string, std::string> fields;
    std::map<std::string, std::string> games;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto sp = line.find(' ');
        std::string key = line.substr(0, sp);
        std::string rest = sp == std::string::npos ? "" : line.substr(sp + 1);
        if (key == "game") {
            std::string body, l;
            while (std::getline(in, l) && l != "end") body += l + "\n";
            games[rest] = body;
        } else {
            fields[key] = rest;
        }
    }
    auto need = [&](const std::string& k) -> const std::string& {
        auto it = fields.find(k);
        if (it == fields.end()) throw InvalidInput("reduction record lacks field '" + k + "'");
        return it->second;
    };
    if (need("reduction") != "1") throw InvalidInput("unsupported reduction record version");
    r.ell = std::stoul(need("ell"));
    r.eps = parse_rational(need("eps"));
    {
        std::istringstream o(need("orig"));
        o >> r.orig_rows >> r.orig_cols;
    }
    r.u = parse_rational(need("u"));
    r.tau1 = std::stoul(need("tau1"));
    r.tau = std::stoul(need("tau"));
    r.delta = parse_rational(need("delta"));
    r.eta = parse_rational(need("eta"));
    r.t2 = parse_rational(need("t2"));
    r.x = split_rationals(need("x"));
    r.x_t2 = split_rationals(need("x_t2"));
    r.omega = split_rationals(need("omega"));
    r.b = split_rationals(need("b"));
    r.e = split_rationals(need("e"));
    r.omega_t2 = split_rationals(need("omega_t2"));
    r.b_t2 = split_rationals(need("b_t2"));
    r.e_t2 = split_rationals(need("e_t2"));
    {
        std::istringstream o(fields.count("J") ? fields["J"] : "");
        std::size_t j;
        while (o >> j) r.J.push_back(j);
    }
    r.v = parse_rational(need("v"));
    r.M = Integer(need("M"));
    r.K = Integer(need("K"));
    r.pure_row = std::stoi(need("pure"));
    r.fast = need("fast") == "1";
    if (!games.count("shifted") || !games.count("C")) throw InvalidInput("reduction record lacks games");
    r.shifted = parse_game(games["shifted"]);
    r.C = parse_game(games["C"]);
    if (games.count("D")) {
        r.Cprime = parse_game(games["Cprime"]);
        r.D = make_generalized(parse_game(games["D"]));
    }
    if (r.x.size() != r.orig_rows || r.x_t2.size() != r.orig_rows) throw InvalidInput("strategy length mismatch");
    if (r.D && r.D->game.cols() != r.J.size()) throw InvalidInput("J does not match the reduced game");
    return r;
}

ReductionOutput load_reduction(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("cannot open reduction file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_reduction(ss.str());
}

}  // namespace bm
