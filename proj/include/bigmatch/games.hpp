#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bigmatch/numeric.hpp"

namespace bm {

struct MatrixGame {
    Matrix a;

    MatrixGame() = default;
    explicit MatrixGame(Matrix entries);
    std::size_t rows() const { return a.size(); }
    std::size_t cols() const { return a.empty() ? 0 : a[0].size(); }
    const Rational& operator()(std::size_t i, std::size_t j) const { return a[i][j]; }
    bool operator==(const MatrixGame& o) const { return a == o.a; }
};

// Repeated game with absorbing states in matrix form: stage payoff pi and stop probability omega.
struct AbsorbingGame {
    Matrix pi;
    Matrix omega;

    AbsorbingGame() = default;
    AbsorbingGame(Matrix payoff, Matrix stop);
    std::size_t rows() const { return pi.size(); }
    std::size_t cols() const { return pi.empty() ? 0 : pi[0].size(); }
    bool operator==(const AbsorbingGame& o) const { return pi == o.pi && omega == o.omega; }
};

AbsorbingGame big_match();
AbsorbingGame zero_value_big_match();
bool is_big_match(const AbsorbingGame& g);

AbsorbingGame parse_game(std::string_view text);
AbsorbingGame load_game(const std::string& path);
std::string render_game(const AbsorbingGame& g);

MatrixGame derived_game(const AbsorbingGame& g);

struct AuxiliarySplit {
    MatrixGame a1;  // omega*b + (1-omega)*u
    MatrixGame a2;  // (1-omega)*(b-u)
};
MatrixGame auxiliary_game(const AbsorbingGame& g, const Rational& u, const Rational& t);
AuxiliarySplit auxiliary_split(const AbsorbingGame& g, const Rational& u);

// Two-row game: row 0 = L never stops, row 1 = R stops with positive probability everywhere.
struct GeneralizedBigMatch {
    AbsorbingGame game;
    MatrixGame derived;
    Rational min_stop;      // min_j omega[R][j]
    Rational max_abs;       // max |derived entry|
    Integer K;              // ceil(max_abs)
    bool big_match = false; // the classic 2x2 Big Match, counter moves +-1
};

GeneralizedBigMatch make_generalized(const AbsorbingGame& g);

// Opponent words over {L,R} are strings of 'L'/'R'; column words are 0-based indices.
Rational density(std::string_view prefix);
// Fraction of L among rounds T'..T (1-based, inclusive), denominator T - T' + 1.
Rational window_density(std::string_view sigma, std::size_t t_from, std::size_t t_to);
Rational generalized_density(const GeneralizedBigMatch& g, const std::vector<int>& columns);

struct SampleRecord {
    std::uint32_t epoch;
    std::uint32_t sub_epoch;
    std::uint32_t sample;
    std::uint64_t round;
    bool operator==(const SampleRecord& o) const {
        return epoch == o.epoch && sub_epoch == o.sub_epoch && sample == o.sample && round == o.round;
    }
};

struct Transcript {
    std::uint64_t horizon = 0;
    std::vector<std::uint16_t> p1_actions;  // rounds 1..stop (or T); empty unless recorded
    std::vector<std::uint16_t> p2_actions;
    std::vector<Rational> rewards;          // same span as the actions; later rounds pay the outcome
    std::optional<std::uint64_t> stop_round;
    std::optional<Rational> outcome;
    Rational reward_sum;                    // sum of r_t over rounds 1..T including the absorbed tail
    std::vector<std::pair<std::uint64_t, Rational>> checkpoint_sums;  // (round, sum of r_1..r_round)
    std::vector<std::uint64_t> memory_trace;  // full trace, debug only
    std::vector<std::uint64_t> decade_max;    // max state over rounds [10^d, 10^(d+1))
    std::uint64_t max_state = 0;
    std::vector<SampleRecord> sample_log;
    bool sample_log_recorded = false;
    std::uint64_t bits_consumed = 0;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> epoch_bits;  // per epoch: (rounds, bits)
    std::uint64_t blocks = 0, crowded_blocks = 0;

    bool operator==(const Transcript& o) const;
};

// Dyadic checkpoints floor(T/2^a) no smaller than t_min; T itself is always included.
std::vector<std::uint64_t> checkpoints(std::uint64_t horizon, std::uint64_t t_min = 64);

Rational finite_payoff(const Transcript& tr);

struct PayoffProxies {
    Rational average;
    Rational liminf;
    Rational limsup;
};
PayoffProxies payoff_proxies(const Transcript& tr);
// Proxies straight from a reward sequence (no absorption), for checks on hand-made data.
PayoffProxies payoff_proxies(const std::vector<Rational>& rewards, std::uint64_t t_min = 64);

}  // namespace bm
