#include "bigmatch/lp.hpp"

#include "bigmatch/errors.hpp"

namespace bm {

namespace {

struct Tableau {
    std::size_t rows = 0, cols = 0;  // cols excludes the rhs column
    Matrix t;
    std::vector<std::size_t> basis;

    void pivot(std::size_t r, std::size_t k) {
        Rational p = t[r][k];
        for (auto& x : t[r]) x /= p;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || t[i][k] == 0) continue;
            Rational f = t[i][k];
            for (std::size_t j = 0; j <= cols; ++j)
                if (t[r][j] != 0) t[i][j] -= f * t[r][j];
        }
        basis[r] = k;
    }

    // Returns false when unbounded. Only columns < eligible may enter.
    bool optimize(const std::vector<Rational>& c, std::size_t eligible) {
        std::vector<bool> is_basic(cols, false);
        for (;;) {
            std::fill(is_basic.begin(), is_basic.end(), false);
            for (auto b : basis) is_basic[b] = true;
            std::size_t enter = cols;
            for (std::size_t k = 0; k < eligible; ++k) {
                if (is_basic[k]) continue;
                Rational d = c[k];
                for (std::size_t r = 0; r < rows; ++r)
                    if (t[r][k] != 0) d -= c[basis[r]] * t[r][k];
                if (d > 0) {
                    enter = k;
                    break;
                }
            }
            if (enter == cols) return true;
            std::size_t leave = rows;
            Rational best;
            for (std::size_t r = 0; r < rows; ++r) {
                if (t[r][enter] <= 0) continue;
                Rational ratio = t[r][cols] / t[r][enter];
                if (leave == rows || ratio < best || (ratio == best && basis[r] < basis[leave])) {
                    leave = r;
                    best = ratio;
                }
            }
            if (leave == rows) return false;
            pivot(leave, enter);
        }
    }
};

}  // namespace

std::optional<std::vector<Rational>> solve_linear(Matrix B, std::vector<Rational> rhs) {
    const std::size_t n = B.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        while (p < n && B[p][k] == 0) ++p;
        if (p == n) return std::nullopt;
        std::swap(B[p], B[k]);
        std::swap(rhs[p], rhs[k]);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == k || B[i][k] == 0) continue;
            Rational f = B[i][k] / B[k][k];
            for (std::size_t j = k; j < n; ++j) B[i][j] -= f * B[k][j];
            rhs[i] -= f * rhs[k];
        }
    }
    for (std::size_t i = 0; i < n; ++i) rhs[i] /= B[i][i];
    return rhs;
}

LPResult simplex_max(const Matrix& A, const std::vector<Rational>& b, const std::vector<Rational>& c,
                     const std::optional<std::vector<std::size_t>>& start_basis) {
    const std::size_t m = A.size();
    const std::size_t n = c.size();
    if (b.size() != m) throw InvalidInput("lp: rhs size mismatch");
    for (const auto& row : A)
        if (row.size() != n) throw InvalidInput("lp: constraint row size mismatch");

    Tableau tab;
    tab.rows = m;
    std::vector<bool> keep(m, true);
    bool ready = false;

    if (start_basis && start_basis->size() == m) {
        tab.cols = n;
        tab.t.assign(m, std::vector<Rational>(n + 1));
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t k = 0; k < n; ++k) tab.t[r][k] = A[r][k];
            tab.t[r][n] = b[r];
        }
        tab.basis.assign(m, n);
        ready = true;
        for (std::size_t r = 0; r < m && ready; ++r) {
            std::size_t k = (*start_basis)[r];
            std::size_t p = r;
            while (p < m && tab.t[p][k] == 0) ++p;
            if (p == m) {
                ready = false;
                break;
            }
            std::swap(tab.t[p], tab.t[r]);
            tab.pivot(r, k);
        }
        if (ready)
            for (std::size_t r = 0; r < m; ++r)
                if (tab.t[r][n] < 0) ready = false;
    }

    if (!ready) {
        // Phase 1 with one artificial per row.
        tab.cols = n + m;
        tab.t.assign(m, std::vector<Rational>(n + m + 1));
        tab.basis.assign(m, 0);
        for (std::size_t r = 0; r < m; ++r) {
            int s = b[r] < 0 ? -1 : 1;
            for (std::size_t k = 0; k < n; ++k) tab.t[r][k] = s * A[r][k];
            tab.t[r][n + r] = 1;
            tab.t[r][n + m] = s * b[r];
            tab.basis[r] = n + r;
        }
        std::vector<Rational> c1(n + m, Rational(0));
        for (std::size_t r = 0; r < m; ++r) c1[n + r] = -1;
        tab.optimize(c1, n + m);
        Rational infeas(0);
        for (std::size_t r = 0; r < m; ++r)
            if (tab.basis[r] >= n) infeas += tab.t[r][n + m];
        if (infeas != 0) return LPResult{};

        for (std::size_t r = 0; r < m; ++r) {
            if (tab.basis[r] < n) continue;
            std::size_t k = 0;
            while (k < n && tab.t[r][k] == 0) ++k;
            if (k < n)
                tab.pivot(r, k);
            else
                keep[r] = false;
        }
        Tableau reduced;
        reduced.cols = n;
        for (std::size_t r = 0; r < m; ++r) {
            if (!keep[r]) continue;
            std::vector<Rational> row(tab.t[r].begin(), tab.t[r].begin() + static_cast<long>(n));
            row.push_back(tab.t[r][n + m]);
            reduced.t.push_back(std::move(row));
            reduced.basis.push_back(tab.basis[r]);
        }
        reduced.rows = reduced.t.size();
        tab = std::move(reduced);
    }

    LPResult res;
    if (!tab.optimize(c, n)) {
        res.status = LPResult::Status::Unbounded;
        return res;
    }
    res.status = LPResult::Status::Optimal;
    res.z.assign(n, Rational(0));
    for (std::size_t r = 0; r < tab.rows; ++r) res.z[tab.basis[r]] = tab.t[r][n];
    res.objective = 0;
    for (std::size_t k = 0; k < n; ++k) res.objective += c[k] * res.z[k];

    // Basis listed per original row; dropped rows keep a sentinel.
    res.basis.assign(m, n);
    std::vector<std::size_t> kept_rows;
    for (std::size_t r = 0; r < m; ++r)
        if (keep[r]) kept_rows.push_back(r);
    for (std::size_t i = 0; i < kept_rows.size(); ++i) res.basis[kept_rows[i]] = tab.basis[i];

    Matrix BT(kept_rows.size(), std::vector<Rational>(kept_rows.size()));
    std::vector<Rational> cb(kept_rows.size());
    for (std::size_t i = 0; i < kept_rows.size(); ++i) {
        cb[i] = c[tab.basis[i]];
        for (std::size_t r = 0; r < kept_rows.size(); ++r) BT[i][r] = A[kept_rows[r]][tab.basis[i]];
    }
    auto pi = solve_linear(BT, cb);
    res.duals.assign(m, Rational(0));
    if (pi)
        for (std::size_t r = 0; r < kept_rows.size(); ++r) res.duals[kept_rows[r]] = (*pi)[r];
    return res;
}

}  // namespace bm
