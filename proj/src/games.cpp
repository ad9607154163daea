#include "bigmatch/games.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "bigmatch/errors.hpp"

namespace bm {

MatrixGame::MatrixGame(Matrix entries) : a(std::move(entries)) {
    if (a.empty() || a[0].empty()) throw InvalidInput("matrix game needs m >= 1 and n >= 1");
    for (const auto& row : a)
        if (row.size() != a[0].size()) throw InvalidInput("ragged matrix game");
}

AbsorbingGame::AbsorbingGame(Matrix payoff, Matrix stop) : pi(std::move(payoff)), omega(std::move(stop)) {
    if (pi.empty() || pi[0].empty()) throw InvalidInput("game needs m >= 1 and n >= 1");
    if (omega.size() != pi.size()) throw InvalidInput("payoff and stop matrices differ in shape");
    for (std::size_t i = 0; i < pi.size(); ++i) {
        if (pi[i].size() != pi[0].size() || omega[i].size() != pi[0].size())
            throw InvalidInput("ragged game matrices");
        for (const auto& w : omega[i])
            if (w < 0 || w > 1) throw InvalidInput("stop probability outside [0,1]");
    }
}

AbsorbingGame big_match() {
    return AbsorbingGame({{1, 0}, {0, 1}}, {{0, 0}, {1, 1}});
}

AbsorbingGame zero_value_big_match() {
    return AbsorbingGame({{1, -1}, {-1, 1}}, {{0, 0}, {1, 1}});
}

bool is_big_match(const AbsorbingGame& g) { return g == big_match(); }

namespace {

struct Token {
    std::string text;
    std::size_t column;
};

std::vector<Token> split_line(const std::string& line) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        out.push_back({line.substr(start, i - start), start + 1});
    }
    return out;
}

std::size_t parse_count(const Token& t, std::size_t line) {
    if (t.text.empty() || !std::all_of(t.text.begin(), t.text.end(), [](unsigned char c) { return std::isdigit(c); }))
        throw ParseError("expected a positive count, got '" + t.text + "'", line, t.column);
    std::size_t v = std::stoul(t.text);
    if (v == 0) throw ParseError("count must be positive", line, t.column);
    return v;
}

}  // namespace

AbsorbingGame parse_game(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t lineno = 0;
    std::optional<std::pair<std::size_t, std::size_t>> header;
    Matrix pi, omega;
    std::size_t last_line = 0;

    while (std::getline(in, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        auto toks = split_line(raw);
        if (toks.empty()) continue;
        last_line = lineno;

        if (toks[0].text == "rows") {
            if (header || !pi.empty()) throw ParseError("header must come first", lineno, toks[0].column);
            if (toks.size() != 4 || toks[2].text != "cols")
                throw ParseError("header must read 'rows m cols n'", lineno, toks[0].column);
            header = {parse_count(toks[1], lineno), parse_count(toks[3], lineno)};
            continue;
        }

        std::vector<Rational> prow, wrow;
        for (const auto& tok : toks) {
            std::string_view s = tok.text;
            auto star = s.find('*');
            Rational v, w(0);
            if (!try_parse_rational(s.substr(0, star), v))
                throw ParseError("malformed payoff '" + std::string(s.substr(0, star)) + "'", lineno, tok.column);
            if (star != std::string_view::npos) {
                auto rest = s.substr(star + 1);
                if (rest.empty()) {
                    w = 1;
                } else if (!try_parse_rational(rest, w)) {
                    throw ParseError("malformed stop probability '" + std::string(rest) + "'", lineno,
                                     tok.column + star + 1);
                } else if (w < 0 || w > 1) {
                    throw ParseError("stop probability outside [0,1]", lineno, tok.column + star + 1);
                }
            }
            prow.push_back(v);
            wrow.push_back(w);
        }
        if (!pi.empty() && prow.size() != pi[0].size())
            throw ParseError("ragged row: expected " + std::to_string(pi[0].size()) + " entries, got " +
                                 std::to_string(prow.size()),
                             lineno, toks.back().column);
        if (header && prow.size() != header->second)
            throw ParseError("row length disagrees with header", lineno, toks.back().column);
        pi.push_back(std::move(prow));
        omega.push_back(std::move(wrow));
    }
    if (pi.empty()) throw ParseError("no rows", lineno == 0 ? 1 : lineno, 1);
    if (header && pi.size() != header->first)
        throw ParseError("row count disagrees with header", last_line, 1);
    return AbsorbingGame(std::move(pi), std::move(omega));
}

AbsorbingGame load_game(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw InvalidInput("cannot open game file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_game(ss.str());
}

std::string render_game(const AbsorbingGame& g) {
    std::string out = "rows " + std::to_string(g.rows()) + " cols " + std::to_string(g.cols()) + "\n";
    for (std::size_t i = 0; i < g.rows(); ++i) {
        for (std::size_t j = 0; j < g.cols(); ++j) {
            if (j) out += ' ';
            out += to_string(g.pi[i][j]);
            if (g.omega[i][j] == 1) {
                out += '*';
            } else if (g.omega[i][j] != 0) {
                out += '*';
                out += to_string(g.omega[i][j]);
            }
        }
        out += '\n';
    }
    return out;
}

MatrixGame derived_game(const AbsorbingGame& g) {
    Matrix a = g.pi;
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j)
            if (g.omega[i][j] > 0) a[i][j] = g.omega[i][j] * g.pi[i][j];
    return MatrixGame(std::move(a));
}

MatrixGame auxiliary_game(const AbsorbingGame& g, const Rational& u, const Rational& t) {
    if (t < 0 || t > 1) throw InvalidParameter("auxiliary game needs 0 <= t <= 1");
    Matrix a = g.pi;
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) {
            const Rational& w = g.omega[i][j];
            const Rational& b = g.pi[i][j];
            a[i][j] = w * b + (1 - w) * (t * b + (1 - t) * u);
        }
    return MatrixGame(std::move(a));
}

AuxiliarySplit auxiliary_split(const AbsorbingGame& g, const Rational& u) {
    Matrix a1 = g.pi, a2 = g.pi;
    for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) {
            const Rational& w = g.omega[i][j];
            const Rational& b = g.pi[i][j];
            a1[i][j] = w * b + (1 - w) * u;
            a2[i][j] = (1 - w) * (b - u);
        }
    return {MatrixGame(std::move(a1)), MatrixGame(std::move(a2))};
}

GeneralizedBigMatch make_generalized(const AbsorbingGame& g) {
    if (g.rows() != 2) throw AssumptionViolated("generalized Big Match needs exactly two rows");
    for (std::size_t j = 0; j < g.cols(); ++j) {
        if (g.omega[0][j] != 0) throw AssumptionViolated("row L must never stop");
        if (g.omega[1][j] <= 0) throw AssumptionViolated("row R must stop with positive probability");
    }
    GeneralizedBigMatch out;
    out.game = g;
    out.derived = derived_game(g);
    out.min_stop = *std::min_element(g.omega[1].begin(), g.omega[1].end());
    out.max_abs = 0;
    for (const auto& row : out.derived.a)
        for (const auto& x : row) out.max_abs = std::max(out.max_abs, Rational(abs(x)));
    out.K = ceil(out.max_abs);
    out.big_match = is_big_match(g);
    return out;
}

Rational density(std::string_view prefix) {
    if (prefix.empty()) throw EmptyRange("density of an empty prefix");
    auto n = std::count(prefix.begin(), prefix.end(), 'L');
    Rational d(static_cast<long>(n), static_cast<unsigned long>(prefix.size()));
    d.canonicalize();
    return d;
}

Rational window_density(std::string_view sigma, std::size_t t_from, std::size_t t_to) {
    if (t_from < 1 || t_to < t_from || t_to > sigma.size()) throw EmptyRange("empty or out-of-range window");
    auto w = sigma.substr(t_from - 1, t_to - t_from + 1);
    auto n = std::count(w.begin(), w.end(), 'L');
    Rational d(static_cast<long>(n), static_cast<unsigned long>(t_to - t_from + 1));
    d.canonicalize();
    return d;
}

Rational generalized_density(const GeneralizedBigMatch& g, const std::vector<int>& columns) {
    if (columns.empty()) throw EmptyRange("generalized density of an empty prefix");
    Rational s(0);
    for (int c : columns) {
        if (c < 0 || static_cast<std::size_t>(c) >= g.game.cols()) throw InvalidAction("column out of range");
        s += g.game.pi[0][c];
    }
    return s / static_cast<long>(columns.size());
}

bool Transcript::operator==(const Transcript& o) const {
    return horizon == o.horizon && p1_actions == o.p1_actions && p2_actions == o.p2_actions &&
           rewards == o.rewards && stop_round == o.stop_round && outcome == o.outcome &&
           reward_sum == o.reward_sum && checkpoint_sums == o.checkpoint_sums && memory_trace == o.memory_trace &&
           decade_max == o.decade_max && max_state == o.max_state && sample_log == o.sample_log &&
           bits_consumed == o.bits_consumed && epoch_bits == o.epoch_bits && blocks == o.blocks &&
           crowded_blocks == o.crowded_blocks && sample_log_recorded == o.sample_log_recorded;
}

std::vector<std::uint64_t> checkpoints(std::uint64_t horizon, std::uint64_t t_min) {
    std::vector<std::uint64_t> out;
    if (horizon == 0) return out;
    out.push_back(horizon);
    for (std::uint64_t c = horizon / 2; c >= 1 && c >= t_min; c /= 2)
        if (c != out.back()) out.push_back(c);
    std::reverse(out.begin(), out.end());
    return out;
}

Rational finite_payoff(const Transcript& tr) {
    if (tr.horizon == 0) throw EmptyRange("finite payoff of an empty play");
    if (tr.stop_round) return *tr.outcome;
    return tr.reward_sum / Rational(Integer(std::to_string(tr.horizon)));
}

namespace {

Rational ratio(const Rational& sum, std::uint64_t n) { return sum / Rational(Integer(std::to_string(n))); }

}  // namespace

PayoffProxies payoff_proxies(const Transcript& tr) {
    if (tr.horizon == 0) throw EmptyRange("payoff proxies of an empty play");
    PayoffProxies p;
    p.average = ratio(tr.reward_sum, tr.horizon);
    p.liminf = p.limsup = p.average;
    for (const auto& [c, s] : tr.checkpoint_sums) {
        Rational a = ratio(s, c);
        if (a < p.liminf) p.liminf = a;
        if (a > p.limsup) p.limsup = a;
    }
    return p;
}

PayoffProxies payoff_proxies(const std::vector<Rational>& rewards, std::uint64_t t_min) {
    if (rewards.empty()) throw EmptyRange("payoff proxies of an empty play");
    auto cps = checkpoints(rewards.size(), t_min);
    PayoffProxies p;
    Rational sum(0);
    std::size_t next = 0;
    bool first = true;
    for (std::size_t t = 1; t <= rewards.size(); ++t) {
        sum += rewards[t - 1];
        if (next < cps.size() && cps[next] == t) {
            Rational a = ratio(sum, t);
            if (first || a < p.liminf) p.liminf = a;
            if (first || a > p.limsup) p.limsup = a;
            first = false;
            ++next;
        }
    }
    p.average = ratio(sum, rewards.size());
    return p;
}

}  // namespace bm
