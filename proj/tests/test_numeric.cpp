#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <random>

#include "bigmatch/errors.hpp"
#include "bigmatch/numeric.hpp"
#include "bigmatch/solver.hpp"

using namespace bm;

namespace {

Rational cofactor_det(const Matrix& m) {
    const std::size_t n = m.size();
    if (n == 1) return m[0][0];
    Rational s(0);
    for (std::size_t c = 0; c < n; ++c) {
        Matrix minor;
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<Rational> row;
            for (std::size_t k = 0; k < n; ++k)
                if (k != c) row.push_back(m[r][k]);
            minor.push_back(row);
        }
        Rational t = m[0][c] * cofactor_det(minor);
        s += c % 2 ? Rational(-t) : t;
    }
    return s;
}

// Durand-Kerner on the monic version of f; returns all complex roots.
std::vector<std::complex<double>> numeric_roots(const Polynomial& f) {
    const int n = static_cast<int>(f.degree());
    std::vector<double> c;
    for (const auto& x : f.coeffs) c.push_back(x.get_d() / f.coeffs.back().get_d());
    auto eval = [&](std::complex<double> z) {
        std::complex<double> v = 0;
        for (int k = n; k >= 0; --k) v = v * z + c[static_cast<std::size_t>(k)];
        return v;
    };
    std::vector<std::complex<double>> z(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) z[static_cast<std::size_t>(k)] = std::pow(std::complex<double>(0.4, 0.9), k);
    for (int it = 0; it < 2000; ++it)
        for (int k = 0; k < n; ++k) {
            std::complex<double> d = 1;
            for (int j = 0; j < n; ++j)
                if (j != k) d *= z[static_cast<std::size_t>(k)] - z[static_cast<std::size_t>(j)];
            z[static_cast<std::size_t>(k)] -= eval(z[static_cast<std::size_t>(k)]) / d;
        }
    return z;
}

Matrix random_matrix(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<long> num(-9, 9), den(1, 5);
    Matrix m(n, std::vector<Rational>(n));
    for (auto& row : m)
        for (auto& x : row) {
            x = Rational(num(rng), static_cast<unsigned long>(den(rng)));
            x.canonicalize();
        }
    return m;
}

}  // namespace

TEST_CASE("rational text syntax") {
    CHECK(parse_rational("3") == 3);
    CHECK(parse_rational("-3/6") == Rational(-1, 2));
    CHECK(to_string(parse_rational("4/8")) == "1/2");
    CHECK(to_string(Rational(-7)) == "-7");
    Rational out;
    CHECK_FALSE(try_parse_rational("1/0", out));
    CHECK_FALSE(try_parse_rational("1/-2", out));
    CHECK_FALSE(try_parse_rational(" 1", out));
    CHECK_FALSE(try_parse_rational("", out));
    CHECK_THROWS_AS(parse_rational("x"), InvalidInput);
}

TEST_CASE("canonical form survives arithmetic") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 200; ++k) {
        auto m = random_matrix(rng, 2);
        Rational a = m[0][0], b = m[0][1];
        for (Rational r : {Rational(a + b), Rational(a - b), Rational(a * b)}) {
            CHECK(r.get_den() > 0);
            CHECK(gcd(r.get_num(), r.get_den()) == 1);
        }
        if (b != 0) CHECK((a / b) * b == a);
    }
}

TEST_CASE("poly_eval") {
    CHECK(poly_eval(Polynomial{}, Rational(7, 3)) == 0);
    CHECK(poly_eval(Polynomial({1, 2}), Rational(1, 2)) == 2);
}

TEST_CASE("interpolate") {
    CHECK(interpolate({{0, 1}, {1, 1}}, 1) == Polynomial({1}));
    CHECK(interpolate({{1, 1}, {2, 4}, {3, 9}}, 2) == Polynomial({0, 0, 1}));
    CHECK_THROWS_AS(interpolate({{1, 1}, {1, 2}}, 1), DegenerateInterpolation);

    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long> c(-20, 20);
    for (int k = 0; k < 30; ++k) {
        std::vector<Rational> cs;
        for (int d = 0; d <= 4; ++d) {
            cs.emplace_back(c(rng), 3);
            cs.back().canonicalize();
        }
        Polynomial p(cs);
        std::vector<std::pair<Rational, Rational>> pts;
        for (long t = -2; t <= 2; ++t) pts.emplace_back(t, poly_eval(p, t));
        CHECK(interpolate(pts, 4) == p);
    }
}

TEST_CASE("interpolated determinant matches the cofactor expansion") {
    // det of a 3x3 matrix with entries linear in t, sampled at 4 points, against direct expansion at other points.
    std::mt19937_64 rng(3);
    Matrix a0 = random_matrix(rng, 3), a1 = random_matrix(rng, 3);
    auto at = [&](const Rational& t) {
        Matrix m = a0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) m[i][j] += t * a1[i][j];
        return m;
    };
    std::vector<std::pair<Rational, Rational>> pts;
    for (long t = 0; t <= 3; ++t) pts.emplace_back(t, determinant(at(t)));
    Polynomial p = interpolate(pts, 3);
    for (Rational t : {Rational(1, 3), Rational(-5, 2), Rational(17)}) CHECK(poly_eval(p, t) == cofactor_det(at(t)));
}

TEST_CASE("basis polynomial of the Big Match family matches a direct determinant") {
    auto split = auxiliary_split(big_match(), Rational(0));
    ParametricGame pg = parametric_basis(split.a1, split.a2);
    // Cramer numerator for x_1 on the scaled game at t0.
    Matrix scaled = pg.at(pg.t0).a;
    for (auto& row : scaled)
        for (auto& x : row) x *= pg.beta;
    Matrix M = basis_matrix(MatrixGame(scaled), pg.basis);
    Matrix M1 = M;
    for (std::size_t r = 0; r < M1.size(); ++r) M1[r][0] = r + 1 == M1.size() ? 1 : 0;
    CHECK(poly_eval(pg.Q, pg.t0) == cofactor_det(M));
    CHECK(poly_eval(pg.P[0], pg.t0) == cofactor_det(M1));
}

TEST_CASE("root_magnitude_bounds") {
    auto b = root_magnitude_bounds(Polynomial({-1, 2}));
    CHECK(b.first == Rational(1, 4));
    CHECK(b.second == 4);
    b = root_magnitude_bounds(Polynomial({2, -3, 1}));
    CHECK(b.first == Rational(1, 6));
    CHECK(b.second == 6);
    CHECK_THROWS_AS(root_magnitude_bounds(Polynomial{}), ZeroPolynomial);

    std::mt19937_64 rng(17);
    std::uniform_int_distribution<long> c(-30, 30);
    std::uniform_int_distribution<int> deg(1, 5);
    for (int k = 0; k < 50; ++k) {
        int d = deg(rng);
        std::vector<Rational> cs;
        for (int i = 0; i <= d; ++i) cs.emplace_back(c(rng));
        if (cs.back() == 0) cs.back() = 1;
        Polynomial f(cs);
        auto [lo, hi] = root_magnitude_bounds(f);
        for (auto z : numeric_roots(f)) {
            if (std::abs(z.imag()) > 1e-7 || std::abs(z) < 1e-9) continue;
            CHECK(std::abs(z) > lo.get_d());
            CHECK(std::abs(z) < hi.get_d());
        }
    }
}

TEST_CASE("determinant") {
    CHECK(determinant(identity(3)) == 1);
    CHECK(determinant({{1, 2}, {3, 4}}) == -2);
    std::mt19937_64 rng(23);
    for (int k = 0; k < 10; ++k) {
        Matrix m = random_matrix(rng, 5);
        CHECK(determinant(m) == cofactor_det(m));
    }
    for (int k = 0; k < 10; ++k) {
        Matrix a = random_matrix(rng, 3), b = random_matrix(rng, 3);
        CHECK(determinant(multiply(a, b)) == determinant(a) * determinant(b));
        Matrix sw = a;
        std::swap(sw[0], sw[2]);
        CHECK(determinant(sw) == -determinant(a));
        Matrix sc = a;
        for (auto& x : sc[1]) x *= Rational(7, 2);
        CHECK(determinant(sc) == Rational(7, 2) * determinant(a));
    }
}
