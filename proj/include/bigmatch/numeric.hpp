#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bm {

using Rational = mpq_class;
using Integer = mpz_class;
using Matrix = std::vector<std::vector<Rational>>;

// Canonical text form: p, -p or p/q with q > 0.
Rational parse_rational(std::string_view s);
bool try_parse_rational(std::string_view s, Rational& out);
std::string to_string(const Rational& r);
std::string to_decimal(const Rational& r, int digits = 12);
double to_double(const Rational& r);

Rational pow(const Rational& base, unsigned long e);
Integer ipow(const Integer& base, unsigned long e);
Integer ceil(const Rational& r);
Integer floor(const Rational& r);
Integer lcm_of_denominators(const std::vector<Rational>& xs);
// Bit length of |n| (0 for n = 0).
std::size_t bit_size(const Integer& n);

// Dense polynomial, lowest degree first. The zero polynomial is empty.
struct Polynomial {
    std::vector<Rational> coeffs;

    Polynomial() = default;
    explicit Polynomial(std::vector<Rational> c);

    bool is_zero() const { return coeffs.empty(); }
    // -1 for the zero polynomial.
    long degree() const { return static_cast<long>(coeffs.size()) - 1; }
    const Rational& operator[](std::size_t i) const { return coeffs[i]; }
    void normalize();
    bool operator==(const Polynomial& o) const { return coeffs == o.coeffs; }
};

Polynomial operator+(const Polynomial& a, const Polynomial& b);
Polynomial operator-(const Polynomial& a, const Polynomial& b);
Polynomial operator*(const Polynomial& a, const Polynomial& b);
Polynomial operator*(const Rational& s, const Polynomial& p);

Rational poly_eval(const Polynomial& p, const Rational& t);
Polynomial interpolate(const std::vector<std::pair<Rational, Rational>>& points, std::size_t degree_bound);
// ((2|f|)^-1, 2|f|) for an integer polynomial f, |f| the max-norm.
std::pair<Rational, Rational> root_magnitude_bounds(const Polynomial& f);
// Index of the lowest-degree nonzero coefficient; -1 for zero.
long lowest_nonzero(const Polynomial& p);

Rational determinant(const Matrix& m);
Matrix identity(std::size_t n);
Matrix multiply(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

}  // namespace bm
