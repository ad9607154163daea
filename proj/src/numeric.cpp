#include "bigmatch/numeric.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "bigmatch/errors.hpp"

namespace bm {

namespace {

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

bool try_parse_rational(std::string_view s, Rational& out) {
    std::string_view num = s;
    std::string_view den;
    auto slash = s.find('/');
    if (slash != std::string_view::npos) {
        num = s.substr(0, slash);
        den = s.substr(slash + 1);
        if (!all_digits(den)) return false;
    }
    std::string_view digits = num;
    if (!digits.empty() && (digits[0] == '-' || digits[0] == '+')) digits.remove_prefix(1);
    if (!all_digits(digits)) return false;
    Integer p(std::string(num[0] == '+' ? num.substr(1) : num), 10);
    Integer q(1);
    if (!den.empty()) {
        q = Integer(std::string(den), 10);
        if (q == 0) return false;
    }
    out = Rational(p, q);
    out.canonicalize();
    return true;
}

Rational parse_rational(std::string_view s) {
    Rational r;
    if (!try_parse_rational(s, r)) throw InvalidInput("not a rational: '" + std::string(s) + "'");
    return r;
}

std::string to_string(const Rational& r) {
    if (r.get_den() == 1) return r.get_num().get_str();
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

std::string to_decimal(const Rational& r, int digits) {
    Integer scale = ipow(Integer(10), static_cast<unsigned long>(digits));
    Rational a = abs(r) * scale;
    Integer q = floor(a + Rational(1, 2));
    std::string s = q.get_str();
    if (static_cast<int>(s.size()) <= digits) s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
    s.insert(s.size() - static_cast<std::size_t>(digits), ".");
    if (sgn(r) < 0 && q != 0) s.insert(0, "-");
    return s;
}

double to_double(const Rational& r) { return r.get_d(); }

Integer ipow(const Integer& base, unsigned long e) {
    Integer out;
    mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), e);
    return out;
}

Rational pow(const Rational& base, unsigned long e) {
    Rational out(ipow(base.get_num(), e), ipow(base.get_den(), e));
    out.canonicalize();
    return out;
}

Integer floor(const Rational& r) {
    Integer out;
    mpz_fdiv_q(out.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    return out;
}

Integer ceil(const Rational& r) {
    Integer out;
    mpz_cdiv_q(out.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    return out;
}

Integer lcm_of_denominators(const std::vector<Rational>& xs) {
    Integer l(1);
    for (const auto& x : xs) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
    return l;
}

std::size_t bit_size(const Integer& n) {
    if (n == 0) return 0;
    return mpz_sizeinbase(n.get_mpz_t(), 2);
}

Polynomial::Polynomial(std::vector<Rational> c) : coeffs(std::move(c)) { normalize(); }

void Polynomial::normalize() {
    while (!coeffs.empty() && coeffs.back() == 0) coeffs.pop_back();
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<Rational> c(std::max(a.coeffs.size(), b.coeffs.size()));
    for (std::size_t i = 0; i < a.coeffs.size(); ++i) c[i] += a.coeffs[i];
    for (std::size_t i = 0; i < b.coeffs.size(); ++i) c[i] += b.coeffs[i];
    return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + Rational(-1) * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> c(a.coeffs.size() + b.coeffs.size() - 1);
    for (std::size_t i = 0; i < a.coeffs.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs.size(); ++j) c[i + j] += a.coeffs[i] * b.coeffs[j];
    return Polynomial(std::move(c));
}

Polynomial operator*(const Rational& s, const Polynomial& p) {
    std::vector<Rational> c = p.coeffs;
    for (auto& x : c) x *= s;
    return Polynomial(std::move(c));
}

Rational poly_eval(const Polynomial& p, const Rational& t) {
    Rational acc(0);
    for (auto it = p.coeffs.rbegin(); it != p.coeffs.rend(); ++it) acc = acc * t + *it;
    return acc;
}

Polynomial interpolate(const std::vector<std::pair<Rational, Rational>>& points, std::size_t degree_bound) {
    if (points.size() != degree_bound + 1)
        throw InvalidParameter("interpolation needs degree_bound + 1 points");
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i].first == points[j].first)
                throw DegenerateInterpolation("duplicate abscissa " + to_string(points[i].first));

    Polynomial result;
    for (std::size_t i = 0; i < points.size(); ++i) {
        Polynomial basis({Rational(1)});
        Rational denom(1);
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (j == i) continue;
            basis = basis * Polynomial({-points[j].first, Rational(1)});
            denom *= points[i].first - points[j].first;
        }
        result = result + Rational(points[i].second / denom) * basis;
    }
    return result;
}

std::pair<Rational, Rational> root_magnitude_bounds(const Polynomial& f) {
    if (f.is_zero()) throw ZeroPolynomial("root bounds of the zero polynomial");
    Rational norm(0);
    for (const auto& c : f.coeffs) {
        if (c.get_den() != 1) throw InvalidInput("root bounds need integer coefficients");
        if (abs(c) > norm) norm = abs(c);
    }
    Rational upper = 2 * norm;
    return {Rational(1) / upper, upper};
}

long lowest_nonzero(const Polynomial& p) {
    for (std::size_t i = 0; i < p.coeffs.size(); ++i)
        if (p.coeffs[i] != 0) return static_cast<long>(i);
    return -1;
}

Rational determinant(const Matrix& m) {
    const std::size_t n = m.size();
    if (n == 0) return Rational(1);
    for (const auto& row : m)
        if (row.size() != n) throw InvalidInput("determinant of a non-square matrix");

    // Clear denominators row by row, then Bareiss over the integers.
    std::vector<std::vector<Integer>> a(n, std::vector<Integer>(n));
    Integer scale(1);
    for (std::size_t i = 0; i < n; ++i) {
        Integer l = lcm_of_denominators(m[i]);
        scale *= l;
        for (std::size_t j = 0; j < n; ++j) a[i][j] = m[i][j].get_num() * (l / m[i][j].get_den());
    }

    int sign = 1;
    Integer prev(1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            std::size_t p = k + 1;
            while (p < n && a[p][k] == 0) ++p;
            if (p == n) return Rational(0);
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                a[i][j] = a[i][j] * a[k][k] - a[i][k] * a[k][j];
                mpz_divexact(a[i][j].get_mpz_t(), a[i][j].get_mpz_t(), prev.get_mpz_t());
            }
        }
        prev = a[k][k];
    }
    Rational det(a[n - 1][n - 1] * sign, scale);
    det.canonicalize();
    return det;
}

Matrix identity(std::size_t n) {
    Matrix m(n, std::vector<Rational>(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
    return m;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    const std::size_t n = a.size(), k = b.size(), p = b.empty() ? 0 : b[0].size();
    Matrix c(n, std::vector<Rational>(p, Rational(0)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < k; ++l)
            if (a[i][l] != 0)
                for (std::size_t j = 0; j < p; ++j) c[i][j] += a[i][l] * b[l][j];
    return c;
}

Matrix transpose(const Matrix& a) {
    if (a.empty()) return {};
    Matrix t(a[0].size(), std::vector<Rational>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
    return t;
}

}  // namespace bm
