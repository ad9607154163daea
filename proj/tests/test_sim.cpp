#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "bigmatch/errors.hpp"
#include "bigmatch/rng.hpp"
#include "bigmatch/sim.hpp"

using namespace bm;

namespace {

SimConfig config(const AbsorbingGame& g, const std::string& p1, const std::string& p2, std::uint64_t T,
                 std::uint64_t replicas = 1, std::uint64_t seed = 1) {
    SimConfig cfg;
    cfg.game = g;
    cfg.p1 = make_strategy(p1, g);
    cfg.p2 = make_adversary(p2, g);
    cfg.horizon = T;
    cfg.replicas = replicas;
    cfg.seed = seed;
    return cfg;
}

// Path-by-path oracle: the counter path is fixed by the word, so the stop round distribution is a product.
std::pair<Rational, Rational> enumerate_stops(long i, const Rational& xi, const std::string& word) {
    Rational alive(1), win(0), loss(0);
    long j = 0;
    for (char c : word) {
        Rational p = j + i > 0 ? pow(xi, 4) * pow(1 - xi, static_cast<unsigned long>(i + j)) : pow(xi, 4);
        (c == 'R' ? win : loss) += alive * p;
        alive *= 1 - p;
        j += c == 'L' ? 1 : -1;
    }
    return {win, loss};
}

class Malformed : public MemoryStrategy {
public:
    std::string name() const override { return "malformed"; }
    std::size_t num_actions() const override { return 2; }
    std::size_t num_opp_actions() const override { return 2; }
    Integer start_state() const override { return 0; }
    std::vector<Rational> action(const Integer&) const override { return {Rational(1, 2), Rational(1, 3)}; }
    StateDist update(std::size_t, std::size_t, const Integer& m) const override { return {{m, Rational(1)}}; }
    bool deterministic_update() const override { return true; }
};

double z(double observed, double p, double n) { return std::abs(observed - p) / std::sqrt(p * (1 - p) / n); }

}  // namespace

TEST_CASE("play engine examples") {
    Transcript a = run_play(config(big_match(), "stationary:q=0", "constL", 10));
    CHECK_FALSE(a.stop_round);
    CHECK(finite_payoff(a) == 1);

    Transcript b = run_play(config(big_match(), "stationary:q=1", "constR", 10));
    REQUIRE(b.stop_round);
    CHECK(*b.stop_round == 1);
    CHECK(*b.outcome == 1);
    CHECK(finite_payoff(b) == 1);

    Transcript c = run_play(config(big_match(), "stationary:q=1", "constL", 10));
    CHECK(*c.stop_round == 1);
    CHECK(finite_payoff(c) == 0);
}

TEST_CASE("recorded actions, rewards and checkpoints") {
    SimConfig cfg = config(big_match(), "classic:xi=1/2", "word:LRRLR", 300, 1, 5);
    cfg.record.actions = true;
    cfg.t_min = 1;
    Transcript tr = run_play(cfg, 0);
    std::uint64_t played = tr.stop_round ? *tr.stop_round : cfg.horizon;
    CHECK(tr.p1_actions.size() == played);
    CHECK(tr.rewards.size() == played);
    Rational s(0);
    for (std::size_t t = 0; t < tr.rewards.size(); ++t) {
        CHECK(tr.rewards[t] == cfg.game.pi[tr.p1_actions[t]][tr.p2_actions[t]]);
        s += tr.rewards[t];
    }
    if (tr.stop_round) s += *tr.outcome * static_cast<long>(cfg.horizon - played);
    CHECK(tr.reward_sum == s);
    CHECK(tr.checkpoint_sums.back().first == cfg.horizon);
    CHECK(tr.checkpoint_sums.back().second == s);
}

TEST_CASE("determinism") {
    SimConfig cfg = config(big_match(), "full:eps=1/4,sched=loglog", "phase:eps=1/4,k=1", 5000, 24, 99);
    cfg.record.actions = true;
    cfg.record.sample_log = true;
    CHECK(run_play(cfg, 3) == run_play(cfg, 3));
    CHECK_FALSE(run_play(cfg, 3) == run_play(cfg, 4));
    SimReport r1 = run_batch(cfg);
    cfg.threads = 4;
    SimReport r4 = run_batch(cfg);
    CHECK(r1 == r4);
    std::ostringstream a, b;
    write_csv(r1, a);
    write_csv(r4, b);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("replica,payoff,liminf_proxy,limsup_proxy,stopped,stop_round,outcome,max_state,bits_per_round\n", 0) == 0);
    CHECK(r1.stop_rate >= 0);
    CHECK(r1.stop_rate <= 1);
    for (const auto& row : r1.rows) {
        CHECK(row.payoff >= 0);
        CHECK(row.payoff <= 1);
    }
}

TEST_CASE("malformed strategies are reported") {
    SimConfig cfg = config(big_match(), "stationary:q=0", "constL", 5);
    cfg.p1 = std::make_shared<Malformed>();
    CHECK_THROWS_AS(run_play(cfg, 0), StrategyContractViolation);
    CHECK_THROWS_AS(run_batch(cfg), StrategyContractViolation);
    CHECK_THROWS_AS(parse_record_flags("mem,bogus"), UsageError);
    RecordFlags f = parse_record_flags("mem,samples,bits");
    CHECK(f.memory_trace);
    CHECK(f.sample_log);
    CHECK(f.bits);
    CHECK_FALSE(f.actions);
}

TEST_CASE("full strategy against constant opponents") {
    SimReport l = run_batch(config(big_match(), "full:eps=1/5,sched=loglog", "constL", 1 << 16, 20, 7));
    CHECK(l.mean_payoff >= Rational(19, 20));
    SimConfig cfg = config(big_match(), "full:eps=1/5,sched=loglog", "constR", 1 << 16, 20, 7);
    cfg.threads = 2;
    SimReport r = run_batch(cfg);
    if (r.conditional_outcome) CHECK(*r.conditional_outcome == 1);
}

TEST_CASE("exact stop DP") {
    auto rr = exact_stop_dp(0, Rational(1, 2), "RR");
    CHECK(rr.p_win == Rational(31, 256));
    CHECK(rr.p_loss == 0);
    auto l = exact_stop_dp(0, Rational(1, 2), "L");
    CHECK(l.p_loss == Rational(1, 16));
    CHECK(l.p_win == 0);
    CHECK_THROWS_AS(exact_stop_dp(0, Rational(1, 2), std::string(21, 'L')), CapExceeded);

    // Against exhaustive enumeration on every word up to length 8.
    for (long i = 0; i <= 3; ++i)
        for (std::size_t T = 1; T <= 8; ++T)
            for (unsigned w = 0; w < (1U << T); ++w) {
                std::string word;
                for (std::size_t t = 0; t < T; ++t) word += (w >> t) & 1 ? 'R' : 'L';
                auto dp = exact_stop_dp(i, Rational(1, 3), word);
                auto [win, loss] = enumerate_stops(i, Rational(1, 3), word);
                CHECK(dp.p_win == win);
                CHECK(dp.p_loss == loss);
            }

    // Generalized form on the Big Match: E[U 1{U>0}] = p_win, no negative outcomes.
    GeneralizedBigMatch g = make_generalized(big_match());
    auto gen = exact_stop_dp(2, Rational(1, 2), std::vector<std::size_t>{1, 0, 1, 1}, g);
    auto bm = exact_stop_dp(2, Rational(1, 2), "RLRR");
    CHECK(gen.e_pos == bm.p_win);
    CHECK(gen.e_neg == 0);
    CHECK(gen.p_stop == bm.p_win + bm.p_loss);
    // Zero-value game: outcome -1 on column L.
    GeneralizedBigMatch zv = make_generalized(zero_value_big_match());
    auto z1 = exact_stop_dp(0, Rational(1, 2), std::vector<std::size_t>{0}, zv);
    CHECK(z1.e_neg == Rational(-1, 16));
    CHECK(z1.p_stop == Rational(1, 16));
}

TEST_CASE("base lemma verification and its mutation check") {
    std::vector<Rational> xis{Rational(1, 2), Rational(1, 4)};
    CHECK(verify_base_lemma(make_generalized(big_match()), 3, 8, xis).empty());
    CHECK(verify_base_lemma(make_generalized(zero_value_big_match()), 3, 8, xis).empty());
    CHECK_FALSE(verify_base_lemma(make_generalized(big_match()), 3, 8, xis, 3).empty());

    // Item 2 directly: density at most 1/2 - delta and T > i / (2 delta).
    const Rational xi(1, 3);
    for (long i = 0; i <= 2; ++i)
        for (std::size_t T = 1; T <= 10; ++T)
            for (unsigned w = 0; w < (1U << T); ++w) {
                std::string word;
                for (std::size_t t = 0; t < T; ++t) word += (w >> t) & 1 ? 'R' : 'L';
                Rational d = density(word);
                if (d >= Rational(1, 2)) continue;
                Rational delta = Rational(1, 2) - d;
                if (Rational(static_cast<long>(T)) <= Rational(i) / (2 * delta)) continue;
                auto dp = exact_stop_dp(i, xi, word);
                CHECK(dp.p_win + dp.p_loss >= pow(xi, 4));
            }
}

TEST_CASE("simulation agrees with the exact DP") {
    const std::string word = "RRLRLLRRLRRR";
    SimConfig cfg = config(big_match(), "base:i=0,xi=1/2", "word:" + word, word.size(), 100000, 11);
    cfg.threads = 4;
    double win = 0, loss = 0;
    SimReport r = run_batch(cfg);
    for (const auto& row : r.rows)
        if (row.stop_round) (*row.outcome == 1 ? win : loss) += 1;
    const double n = 100000;
    auto dp = exact_stop_dp(0, Rational(1, 2), word);
    CHECK(z(win / n, dp.p_win.get_d(), n) <= 4);
    CHECK(z(loss / n, dp.p_loss.get_d(), n) <= 4);
}

TEST_CASE("absorption frequency matches omega") {
    AbsorbingGame g = parse_game("1 0\n0*1/3 1*2/5");
    for (auto [adv, p] : {std::pair{"constL", 1.0 / 3}, {"constR", 2.0 / 5}}) {
        SimConfig cfg = config(g, "stationary:q=1", adv, 1, 20000, 3);
        SimReport r = run_batch(cfg);
        CHECK(z(r.stop_rate.get_d(), p, 20000) <= 3);
    }
}

TEST_CASE("exact samplers") {
    BitSource bits(stream_seed(1, 2, 3));
    for (Rational p : {Rational(5, 7), Rational(1, 3), Rational(1, 1024), Rational(0), Rational(1)}) {
        LazyBernoulli b(p);
        const int n = 100000;
        int hits = 0;
        std::uint64_t before = bits.consumed();
        for (int k = 0; k < n; ++k) hits += b.draw(bits);
        double used = static_cast<double>(bits.consumed() - before) / n;
        CHECK(used <= 2.05);
        if (p == 0) CHECK(hits == 0);
        else if (p == 1) CHECK(hits == n);
        else CHECK(z(hits / double(n), p.get_d(), n) <= 4);
    }
    // Chi-square on a three-way split, 2 degrees of freedom; 13.8 is the 0.999 quantile.
    std::vector<Rational> probs{Rational(1, 6), Rational(1, 3), Rational(1, 2)};
    std::vector<double> counts(3, 0);
    const int n = 60000;
    for (int k = 0; k < n; ++k) counts[sample_index(probs, bits)] += 1;
    double chi = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        double e = probs[c].get_d() * n;
        chi += (counts[c] - e) * (counts[c] - e) / e;
    }
    CHECK(chi < 13.8);

    LazyGeometric g(Rational(3, 4));
    double mean = 0;
    std::map<std::uint64_t, int> first;
    for (int k = 0; k < n; ++k) {
        std::uint64_t x = g.draw(bits);
        CHECK(x >= 1);
        mean += static_cast<double>(x);
        if (x <= 2) ++first[x];
    }
    mean /= n;
    CHECK(std::abs(mean - 4) < 4 * std::sqrt(12.0 / n));
    CHECK(z(first[1] / double(n), 0.25, n) <= 4);
    CHECK(z(first[2] / double(n), 0.1875, n) <= 4);

    CHECK(stream_seed(1, 2, 1) != stream_seed(1, 2, 2));
    CHECK(stream_seed(1, 2, 1) != stream_seed(1, 3, 1));
}

TEST_CASE("space bound") {
    CHECK(space_bound(1024) == 4 * ipow(Integer(21), 6));
    CHECK(quantile95({5, 1, 3, 2, 4}) == 5);
    std::vector<std::uint64_t> v;
    for (std::uint64_t k = 1; k <= 100; ++k) v.push_back(k);
    CHECK(quantile95(v) == 95);
    const std::uint64_t T = 1 << 16;
    SimConfig cfg = config(big_match(), "observer:full:eps=1/5,sched=loglog", "doubling", T, 20, 4);
    cfg.threads = 4;
    SimReport r = run_batch(cfg);
    CHECK(Integer(static_cast<unsigned long>(r.max_state_q95)) < space_bound(T));
}

TEST_CASE("tail bounds") {
    TailParams h;
    h.ranges.assign(100, Rational(1));
    h.t = 10;
    CHECK(std::abs(to_double(tail_bound(TailKind::Hoeffding, h)) - 2 * std::exp(-2.0)) < 1e-15);
    TailParams c;
    c.mean = 3;
    c.eps = 1;
    CHECK(std::abs(to_double(tail_bound(TailKind::ChernoffUpper, c)) - std::exp(-1.0)) < 1e-15);
    c.eps = Rational(1, 2);
    CHECK(std::abs(to_double(tail_bound(TailKind::ChernoffLower, c)) - std::exp(-3.0 / 8)) < 1e-15);
    c.eps = 1;
    CHECK_THROWS_AS(tail_bound(TailKind::ChernoffLower, c), InvalidParameter);
    h.t = 0;
    CHECK_THROWS_AS(tail_bound(TailKind::Hoeffding, h), InvalidParameter);
    CHECK_THROWS_AS(goodbalance_bound(Rational(1, 4), 10, 20), InvalidParameter);
    CHECK(goodbalance_bound(Rational(1, 5), 10, 20) > 0);
}

TEST_CASE("sub-epoch statistics") {
    SimConfig cfg = config(big_match(), "observer:full:eps=1/5,sched=loglog", "constL", 1 << 22, 1, 8);
    Transcript bare = run_play(cfg, 0);
    EpochSchedule s = schedule_loglog();
    CHECK_THROWS_AS(subepoch_stats(bare, s, Rational(1, 4)), NotRecorded);

    cfg.record.sample_log = true;
    Transcript tr = run_play(cfg, 0);
    auto rows = subepoch_stats(tr, s, Rational(1, 4));
    std::size_t late = 0, flagged = 0;
    for (const auto& r : rows) {
        CHECK(r.samples == std::uint64_t(r.epoch) * r.epoch);
        if (r.clamped) CHECK(r.length == std::uint64_t(r.epoch) * r.epoch);
        if (r.epoch >= 10) {
            ++late;
            flagged += r.flagged;
        }
    }
    REQUIRE(late > 50);
    CHECK(static_cast<double>(flagged) <= 0.05 * static_cast<double>(late));
    // The summed bound from the balance argument dominates the observed flag rate at M = 10.
    double bound = to_double(goodbalance_bound(Rational(1, 5), 10, 21));
    auto rows5 = subepoch_stats(tr, s, Rational(1, 5));
    double f5 = 0, n5 = 0;
    for (const auto& r : rows5)
        if (r.epoch >= 10) n5 += 1, f5 += r.flagged;
    CHECK(f5 / n5 <= bound);
}

TEST_CASE("bit accounting") {
    SimConfig cfg = config(big_match(), "full:eps=1/5,sched=loglog", "constL", 1 << 22, 1, 12);
    cfg.record.bits = true;
    cfg.block_mode = true;
    BitReport block = bit_accounting(cfg);
    CHECK(block.amortized(12) <= 2);
    CHECK(bit_accounting(cfg).amortized(12) == block.amortized(12));
    cfg.block_mode = false;
    BitReport plain = bit_accounting(cfg);
    CHECK(plain.amortized(12) > block.amortized(12));
    std::uint64_t rounds = 0;
    for (const auto& e : block.epochs) rounds += e.rounds;
    CHECK(rounds <= cfg.horizon);
}
