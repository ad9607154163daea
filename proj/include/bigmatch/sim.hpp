#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bigmatch/adversaries.hpp"
#include "bigmatch/games.hpp"
#include "bigmatch/strategies.hpp"

namespace bm {

struct RecordFlags {
    bool memory_trace = false;  // full per-round state trace (debug only)
    bool sample_log = false;
    bool bits = false;          // per-epoch bit counts
    bool actions = false;       // per-round actions and rewards
};

RecordFlags parse_record_flags(const std::string& list);

struct SimConfig {
    AbsorbingGame game;
    StrategyPtr p1;
    AdversaryPtr p2;
    std::uint64_t horizon = 1;
    std::uint64_t replicas = 1;
    std::uint64_t seed = 0;
    RecordFlags record;
    bool block_mode = false;
    unsigned threads = 1;
    std::uint64_t t_min = 64;
};

Transcript run_play(const SimConfig& cfg, std::uint64_t replica = 0);

struct ReplicaSummary {
    std::uint64_t replica = 0;
    Rational payoff;
    PayoffProxies proxies;
    std::optional<std::uint64_t> stop_round;
    std::optional<Rational> outcome;
    std::uint64_t max_state = 0;
    std::uint64_t rounds = 0;  // rounds actually played
    std::uint64_t bits = 0;
    std::vector<std::uint64_t> decade_max;
};

struct SimReport {
    std::vector<ReplicaSummary> rows;
    Rational mean_payoff;
    Rational stop_rate;
    std::optional<Rational> conditional_outcome;  // mean outcome given a stop
    double payoff_q05 = 0, payoff_q50 = 0, payoff_q95 = 0;
    std::uint64_t max_state_q95 = 0;
    std::optional<Rational> visited_patience;  // only with a memory trace
    double bits_per_round = 0;

    bool operator==(const SimReport& o) const;
};

ReplicaSummary summarize(const Transcript& tr, std::uint64_t replica);
// Replicas run on cfg.threads workers; visit (if set) sees every transcript, possibly concurrently.
SimReport run_batch(const SimConfig& cfg,
                    const std::function<void(std::uint64_t, const Transcript&)>& visit = {});
void write_csv(const SimReport& r, std::ostream& out);

// 95th percentile (nearest rank) of a sample.
std::uint64_t quantile95(std::vector<std::uint64_t> v);
// 4 (2 ceil(log2 T) + 1)^6
Integer space_bound(std::uint64_t horizon);

// ---------------------------------------------------------------- exact oracles

struct BigMatchStopDP {
    Rational p_win, p_loss;
};
struct GeneralizedStopDP {
    Rational e_neg;  // E[U 1{U<0}]
    Rational e_pos;  // E[U 1{U>0}]
    Rational p_stop;
};

// Forward DP of the base strategy over the first |word| rounds.
BigMatchStopDP exact_stop_dp(long i, const Rational& xi, std::string_view word, unsigned stop_power = 4,
                             std::size_t cap = 20);
GeneralizedStopDP exact_stop_dp(long i, const Rational& xi, const std::vector<std::size_t>& word,
                                const GeneralizedBigMatch& g, unsigned stop_power = 4, std::size_t cap = 20);

// Exhaustive lemma checks over i in 0..i_max, all words of length 1..t_max, and each xi.
std::vector<std::string> verify_base_lemma(const GeneralizedBigMatch& g, long i_max, std::size_t t_max,
                                           const std::vector<Rational>& xis, unsigned stop_power = 4);

struct SubEpochRow {
    std::uint32_t epoch = 0, sub_epoch = 0;
    std::uint64_t length = 0;
    std::uint64_t samples = 0;
    bool clamped = false;  // every round sampled
    bool flagged = false;  // outside [(1-delta)F(i)/i, (1+delta)F(i)/i]
};

std::vector<SubEpochRow> subepoch_stats(const Transcript& tr, const EpochSchedule& s, const Rational& delta);

enum class TailKind { ChernoffUpper, ChernoffLower, Hoeffding };
struct TailParams {
    Rational mean;                // E[X] (Chernoff)
    Rational eps;                 // relative deviation (Chernoff)
    std::vector<Rational> ranges; // b_i - a_i (Hoeffding)
    Rational t;                   // absolute deviation (Hoeffding)
};
// The exp-form relaxations, evaluated to 256 bits and returned exactly as a rational.
Rational tail_bound(TailKind kind, const TailParams& p);
// Sum over M <= i <= i_max of i (exp(-c(1-delta)i^2) + exp(-delta^2 (1+delta) i^2 / 2)).
Rational goodbalance_bound(const Rational& delta, std::size_t M, std::size_t i_max);

struct EpochBits {
    std::uint32_t epoch = 0;
    std::uint64_t rounds = 0, bits = 0;
};
struct BitReport {
    std::vector<EpochBits> epochs;
    std::uint64_t blocks = 0, crowded_blocks = 0;
    Rational amortized(std::uint32_t min_epoch) const;
};
BitReport bit_accounting(const SimConfig& cfg);

}  // namespace bm
