#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bigmatch/errors.hpp"
#include "bigmatch/sim.hpp"
#include "bigmatch/solver.hpp"

namespace py = pybind11;
using namespace bm;

// Rationals cross the boundary as "p/q" strings; the Python package wraps them in Fraction.
namespace {

Matrix to_matrix(const std::vector<std::vector<std::string>>& rows) {
    Matrix m;
    for (const auto& r : rows) {
        std::vector<Rational> row;
        for (const auto& s : r) row.push_back(parse_rational(s));
        m.push_back(std::move(row));
    }
    return m;
}

std::vector<std::string> strings(const std::vector<Rational>& v) {
    std::vector<std::string> out;
    for (const auto& r : v) out.push_back(to_string(r));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Exact solvers and simulation for absorbing games";

    py::register_exception<Error>(m, "Error", PyExc_ValueError);

    py::class_<AbsorbingGame>(m, "Game")
        .def_property_readonly("rows", &AbsorbingGame::rows)
        .def_property_readonly("cols", &AbsorbingGame::cols)
        .def("render", [](const AbsorbingGame& g) { return render_game(g); })
        .def("__eq__", [](const AbsorbingGame& a, const AbsorbingGame& b) { return a == b; });

    m.def("parse_game", [](const std::string& text) { return parse_game(text); });
    m.def("load_game", &load_game);
    m.def("big_match", &big_match);

    m.def("value", [](const AbsorbingGame& g, const std::string& eps) {
        return to_string(approximate_value(g, parse_rational(eps)));
    });

    m.def("solve", [](const std::vector<std::vector<std::string>>& a) {
        GameSolution s = solve_matrix_game(MatrixGame(to_matrix(a)));
        return py::make_tuple(to_string(s.value), strings(s.x), strings(s.y));
    });

    m.def("marginal", [](const std::vector<std::vector<std::string>>& a, const std::vector<std::vector<std::string>>& b) {
        return to_string(marginal_value(MatrixGame(to_matrix(a)), MatrixGame(to_matrix(b))));
    });

    m.def(
        "reduce",
        [](const AbsorbingGame& g, std::size_t ell, bool fast) { return render_reduction(reduce(g, ell, {fast})); },
        py::arg("game"), py::arg("ell"), py::arg("fast_thresholds") = false);

    m.def(
        "simulate",
        [](const AbsorbingGame& g, const std::string& p1, const std::string& p2, std::uint64_t horizon,
           std::uint64_t replicas, std::uint64_t seed, unsigned threads) {
            SimConfig cfg;
            cfg.game = g;
            cfg.p1 = make_strategy(p1, g);
            cfg.p2 = make_adversary(p2, g);
            cfg.horizon = horizon;
            cfg.replicas = replicas;
            cfg.seed = seed;
            cfg.threads = threads;
            SimReport r;
            {
                py::gil_scoped_release release;
                r = run_batch(cfg);
            }
            py::dict out;
            out["mean_payoff"] = to_string(r.mean_payoff);
            out["stop_rate"] = to_string(r.stop_rate);
            out["conditional_outcome"] =
                r.conditional_outcome ? py::object(py::str(to_string(*r.conditional_outcome))) : py::object(py::none());
            out["max_state_q95"] = r.max_state_q95;
            py::list payoffs;
            for (const auto& row : r.rows) payoffs.append(to_string(row.payoff));
            out["payoffs"] = payoffs;
            return out;
        },
        py::arg("game"), py::arg("p1"), py::arg("p2"), py::arg("horizon"), py::arg("replicas") = 1,
        py::arg("seed") = 0, py::arg("threads") = 1);
}
