#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <random>
#include <set>

#include "bigmatch/errors.hpp"
#include "bigmatch/sim.hpp"
#include "bigmatch/strategies.hpp"

using namespace bm;

namespace {

const GeneralizedBigMatch& bigmatch() {
    static GeneralizedBigMatch g = make_generalized(big_match());
    return g;
}

const GeneralizedBigMatch& zero_value() {
    static GeneralizedBigMatch g = make_generalized(zero_value_big_match());
    return g;
}

Rational sum(const std::vector<Rational>& v) {
    Rational s(0);
    for (const auto& x : v) s += x;
    return s;
}

Rational sum(const StateDist& d) {
    Rational s(0);
    for (const auto& [m, p] : d) s += p;
    return s;
}

// Random reachable state of epoch i: after k samples the counter has moved by at most K k.
FullState random_state(std::mt19937_64& rng, long i, long K) {
    FullState s;
    s.i = i;
    s.j = 1 + static_cast<long>(rng() % static_cast<unsigned long>(i));
    long k = static_cast<long>(rng() % static_cast<unsigned long>(i * i));
    s.k = k;
    s.l = static_cast<long>(rng() % static_cast<unsigned long>(2 * K * k + 1)) - K * k;
    s.b = static_cast<int>(rng() % 2);
    return s;
}

}  // namespace

TEST_CASE("base strategy action and update") {
    auto s = base_strategy(0, Rational(1, 2), bigmatch());
    CHECK(s->action(zigzag(0))[1] == Rational(1, 16));
    CHECK(s->action(zigzag(-3))[1] == Rational(1, 16));
    CHECK(s->action(zigzag(2))[1] == Rational(1, 64));
    auto u = s->update(kL, kR, zigzag(0));
    REQUIRE(u.size() == 1);
    CHECK(unzigzag(u[0].first) == -1);
    CHECK(unzigzag(s->update(kL, kL, zigzag(0))[0].first) == 1);
    CHECK(s->deterministic_update());

    auto i3 = base_strategy(3, Rational(1, 2), bigmatch());
    CHECK(i3->action(zigzag(-1))[1] == Rational(1, 16) * Rational(1, 4));

    CHECK_THROWS_AS(base_strategy(0, Rational(1), bigmatch()), InvalidParameter);
    CHECK_THROWS_AS(base_strategy(0, Rational(0), bigmatch()), InvalidParameter);
}

TEST_CASE("generalized update agrees with the Big Match update on the zero-value game") {
    auto gen = base_strategy(1, Rational(1, 3), zero_value());
    auto bm = base_strategy(1, Rational(1, 3), bigmatch());
    CHECK(gen->step(kL) == 1);
    CHECK(gen->step(kR) == -1);
    for (long j = -5; j <= 5; ++j)
        for (std::size_t a : {kL, kR}) {
            CHECK(gen->update(kL, a, zigzag(j)) == bm->update(kL, a, zigzag(j)));
            CHECK(gen->action(zigzag(j)) == bm->action(zigzag(j)));
        }
}

TEST_CASE("zigzag") {
    for (long z = -50; z <= 50; ++z) CHECK(unzigzag(zigzag(z)) == z);
    CHECK(zigzag(0) == 0);
    CHECK(zigzag(-1) == 1);
    CHECK(zigzag(1) == 2);
}

TEST_CASE("classic baseline") {
    auto c = kohlberg_classic(Rational(1, 2), bigmatch());
    CHECK(c->stop_power() == 2);
    CHECK(c->i() == 0);
    CHECK(c->action(zigzag(0))[1] == Rational(1, 4));
    CHECK(c->action(zigzag(2))[1] == Rational(1, 16));
    std::vector<Integer> states;
    for (long j = -2; j <= 2; ++j) states.push_back(zigzag(j));
    CHECK(patience(*c, states) == 16);
}

TEST_CASE("full strategy update cases") {
    auto s = full_strategy(Rational(1, 2), schedule_loglog(), bigmatch());
    CHECK(s->xi() == Rational(1, 4));
    for (long l : {-2L, 0L, 3L})
        for (std::size_t a : {kL, kR}) {
            auto n = s->next(FullState{2, 2, 3, l, 1}, a);
            REQUIRE(!n.empty());
            for (const auto& [t, p] : n) {
                CHECK(t.i == 3);
                CHECK(t.j == 1);
                CHECK(t.k == 0);
                CHECK(t.l == 0);
            }
        }
    // Sub-epoch ending.
    for (const auto& [t, p] : s->next(FullState{3, 1, 8, 5, 1}, kL)) {
        CHECK(t.i == 3);
        CHECK(t.j == 2);
        CHECK(t.k == 0);
        CHECK(t.l == 0);
    }
    // Sample inside the sub-epoch moves the counter by +1 on L and -1 on R.
    for (const auto& [t, p] : s->next(FullState{3, 2, 4, 1, 1}, kR)) {
        CHECK(t.k == 5);
        CHECK(t.l == 0);
    }
    for (const auto& [t, p] : s->next(FullState{3, 2, 4, 1, 1}, kL)) CHECK(t.l == 2);
    // Not sampled: everything but b retained.
    std::mt19937_64 rng(4);
    for (int n = 0; n < 200; ++n) {
        FullState st = random_state(rng, 1 + static_cast<long>(rng() % 12), 1);
        st.b = 0;
        for (std::size_t a : {kL, kR})
            for (const auto& [t, p] : s->next(st, a)) {
                CHECK(t.i == st.i);
                CHECK(t.j == st.j);
                CHECK(t.k == st.k);
                CHECK(t.l == st.l);
            }
        CHECK(s->action(s->encode(st)) == std::vector<Rational>{1, 0});
    }
    // The b' draw uses the sampling probability of the new epoch.
    auto n = s->next(FullState{12, 3, 5, 0, 0}, kL);
    REQUIRE(n.size() == 2);
    CHECK(n[0].second == Rational(27, 64));
    CHECK(n[1].second == Rational(37, 64));
}

TEST_CASE("sampled rounds follow the base strategy with index i") {
    auto s = full_strategy(Rational(1, 2), schedule_loglog(), bigmatch());
    Rational xi = s->xi();
    for (long i = 1; i <= 6; ++i)
        for (long l = -std::min(i * i - 1, 3L); l <= std::min(i * i - 1, 3L); ++l) {
            FullState st{i, 1, i * i - 1, l, 1};
            Rational expect = base_stop_probability(i, l, xi, 4);
            CHECK(s->action(s->encode(st))[1] == expect);
            CHECK(base_strategy(i, xi, bigmatch())->action(zigzag(l))[1] == expect);
        }
}

TEST_CASE("state numbering") {
    auto s = full_strategy(Rational(1, 3), schedule_loglog(), bigmatch());
    CHECK(s->encode(s->start()) == 0);
    CHECK(s->encode(FullState{1, 1, 0, 0, 1}) == 1);
    for (long i = 1; i <= 8; ++i) {
        CHECK(s->epoch_base(i + 1) == s->epoch_base(i) + s->epoch_block(i));
        CHECK(s->epoch_block(i) == 2 * i * i * i * (2 * i * i - 1));
    }
    // Exhaustive injectivity and inverse on the first epochs.
    for (long i = 1; i <= 3; ++i) {
        std::set<Integer> seen;
        for (long j = 1; j <= i; ++j)
            for (long k = 0; k < i * i; ++k)
                for (long l = -(i * i - 1); l <= i * i - 1; ++l)
                    for (int b = 0; b < 2; ++b) {
                        FullState st{i, j, k, l, b};
                        Integer m = s->encode(st);
                        CHECK(m >= s->epoch_base(i));
                        CHECK(m < s->epoch_base(i + 1));
                        CHECK(s->decode(m) == st);
                        seen.insert(m);
                    }
        CHECK(seen.size() == s->epoch_block(i).get_ui());
    }
    std::mt19937_64 rng(9);
    for (int n = 0; n < 500; ++n) {
        long i = 1 + static_cast<long>(rng() % 40);
        FullState a = random_state(rng, i, 1), b = random_state(rng, i + 1 + static_cast<long>(rng() % 3), 1);
        CHECK(s->encode(a) < s->encode(b));
        CHECK(s->decode(s->encode(a)) == a);
    }
}

TEST_CASE("generalized numbering uses K") {
    GeneralizedBigMatch h = make_generalized(parse_game("3 -2\n-6*1/2 4*1/2"));
    auto s = full_strategy(Rational(1, 2), schedule_loglog(), h);
    CHECK(s->K() == 3);
    CHECK(s->xi() == Rational(1, 4) / (4 * 81));
    CHECK(s->step(kL) == 3);
    CHECK(s->step(kR) == -2);
    std::mt19937_64 rng(10);
    for (int n = 0; n < 300; ++n) {
        FullState a = random_state(rng, 1 + static_cast<long>(rng() % 10), 3);
        CHECK(s->decode(s->encode(a)) == a);
        CHECK(s->encode(a) < s->epoch_base(a.i + 1));
    }
}

TEST_CASE("xi mapping") {
    CHECK(full_strategy(Rational(1, 5), schedule_loglog(), bigmatch())->xi() == Rational(1, 25));
    CHECK(zero_value().K == 1);
    CHECK(full_strategy(Rational(1, 5), schedule_loglog(), zero_value())->xi() == Rational(1, 100));
    CHECK_THROWS_AS(full_strategy(Rational(1), schedule_loglog(), bigmatch()), InvalidParameter);
}

TEST_CASE("schedules") {
    EpochSchedule ll = schedule_loglog();
    CHECK(ll.F(1) == 2);
    CHECK(ll.F(10) == 1024);
    CHECK(ll.sample_prob(10) == Rational(125, 128));
    CHECK(ll.raw_sample_prob(2) == 2);
    CHECK(ll.sample_prob(2) == 1);
    CHECK(schedule_violations(ll, 12) == std::vector<std::size_t>{2, 3, 4, 5, 6, 7, 8, 9});

    std::vector<Integer> id;
    for (long t = 1; t <= 64; ++t) id.push_back(t);
    EpochSchedule r = schedule_from_f(id);
    CHECK(r.F(1) == 1);
    for (std::size_t i = 1; i < 40; ++i) {
        CHECK(r.F(i + 1) >= 2 * r.F(i));
        CHECK(r.sample_prob(i) <= 1);
    }

    std::vector<Integer> logf;
    for (long t = 1; t <= 5000; ++t) logf.push_back(static_cast<long>(std::ceil(std::log2(static_cast<double>(t)))) + 1);
    EpochSchedule lg = schedule_from_f(logf);
    CHECK(lg.F(1) == 1);
    for (std::size_t i = 1; i < 20; ++i) CHECK(lg.F(i + 1) >= 2 * lg.F(i));

    CHECK_THROWS_AS(schedule_from_f({1, 3, 2}), InvalidSchedule);
    CHECK_THROWS_AS(schedule_from_f({}), InvalidSchedule);

    // Without the guard, early epochs of F = 2^i are rejected.
    FullStrategy strict(Rational(1, 2), ll, bigmatch(), false, false);
    CHECK(strict.sample_prob(1) == Rational(1, 2));
    CHECK_THROWS_AS(strict.sample_prob(2), ScheduleError);
    CHECK(strict.sample_prob(10) == Rational(125, 128));
}

TEST_CASE("observer variant") {
    auto s = full_strategy(Rational(1, 2), schedule_loglog(), bigmatch());
    auto o = observer_variant(*s);
    CHECK(o->observer());
    std::mt19937_64 rng(12);
    for (int n = 0; n < 300; ++n) {
        FullState st = random_state(rng, 1 + static_cast<long>(rng() % 14), 1);
        Integer m = s->encode(st);
        CHECK(o->action(m) == std::vector<Rational>{1, 0});
        for (std::size_t a : {kL, kR}) CHECK(o->update(kL, a, m) == s->update(kL, a, m));
    }
}

TEST_CASE("observer sample statistics match the stopping strategy before a stop") {
    // With eps = 1/10 a stop has probability below 1e-8 per sampled round, so no replica stops.
    auto s = full_strategy(Rational(1, 10), schedule_loglog(), bigmatch());
    auto o = observer_variant(*s);
    auto count = [&](StrategyPtr p) {
        SimConfig cfg;
        cfg.game = big_match();
        cfg.p1 = p;
        cfg.p2 = make_adversary("constL", cfg.game);
        cfg.horizon = 4096;
        cfg.replicas = 300;
        cfg.seed = 77;
        cfg.record.sample_log = true;
        std::vector<double> c(cfg.replicas);
        std::uint64_t stopped = 0;
        run_batch(cfg, [&](std::uint64_t r, const Transcript& tr) {
            if (tr.stop_round) ++stopped;
            c[r] = static_cast<double>(tr.sample_log.size());
        });
        double mean = 0, var = 0;
        for (double x : c) mean += x;
        mean /= static_cast<double>(c.size());
        for (double x : c) var += (x - mean) * (x - mean);
        var /= static_cast<double>(c.size() - 1);
        return std::make_tuple(mean, var, stopped);
    };
    auto [m1, v1, st1] = count(s);
    auto [m2, v2, st2] = count(o);
    CHECK(st2 == 0);
    CHECK(st1 == 0);
    double se = std::sqrt((v1 + v2) / 300.0);
    CHECK(std::abs(m1 - m2) <= 5 * se + 1e-9);
}

TEST_CASE("patience") {
    auto b = base_strategy(0, Rational(1, 2), bigmatch());
    CHECK(patience(*b, {zigzag(-1), zigzag(0)}) == 16);
    StationaryStrategy pure({Rational(1), Rational(0)}, 2);
    CHECK(patience(pure, {0}) == 1);
    CHECK_THROWS_AS(patience(*b, {}), EmptyRange);

    auto s = full_strategy(Rational(1, 2), schedule_loglog(), bigmatch());
    for (std::size_t i = 10; i <= 14; ++i) {
        Rational p = epoch_patience(*s, i);
        CHECK(p == epoch_patience_closed_form(*s, i));
        CHECK(p >= Rational(s->schedule().F(i)) / Rational(static_cast<long>(i * i * i)));
    }
    for (std::size_t i = 1; i <= 3; ++i) {
        // Brute force over every reachable state of the epoch.
        std::vector<Integer> states;
        for (Integer m = s->epoch_base(i); m < s->epoch_base(i + 1); ++m)
            if (abs(s->decode(m).l) <= s->decode(m).k) states.push_back(m);
        CHECK(patience(*s, states) == epoch_patience(*s, i));
        CHECK(epoch_patience_closed_form(*s, i) == epoch_patience(*s, i));
    }
}

TEST_CASE("lifted strategy") {
    ReductionOutput r;
    r.orig_rows = 2;
    r.orig_cols = 3;
    r.x = {Rational(1), Rational(0)};
    r.x_t2 = {Rational(1, 3), Rational(2, 3)};
    r.J = {0, 2};
    r.D = make_generalized(big_match());
    auto inner = base_strategy(0, Rational(1, 2), bigmatch());
    auto lifted = lifted_strategy(inner, r);
    CHECK_FALSE(lifted->stationary());
    for (long j = -3; j <= 3; ++j) {
        Integer m = zigzag(j);
        CHECK(lifted->update(0, 1, m) == StateDist{{m, Rational(1)}});
        CHECK(lifted->update(1, 0, m) == inner->update(kL, 0, m));
        CHECK(lifted->update(0, 2, m) == inner->update(kL, 1, m));
        auto in = inner->action(m);
        auto out = lifted->action(m);
        CHECK(out[0] == in[0] + in[1] / 3);
        CHECK(sum(out) == 1);
    }
    CHECK_THROWS_AS(lifted->update(0, 3, 0), InvalidAction);

    r.pure_row = 1;
    r.D.reset();
    auto fixed = lifted_strategy(nullptr, r);
    CHECK(fixed->stationary());
    for (long m = 0; m < 4; ++m) CHECK(fixed->action(m) == r.x_t2);
    r.pure_row = 0;
    CHECK(lifted_strategy(nullptr, r)->action(0) == r.x);
}

TEST_CASE("counter semantics") {
    std::mt19937_64 rng(21);
    GeneralizedBigMatch h = make_generalized(parse_game("3 -2\n-4*1/2 6*1/3"));
    for (int n = 0; n < 50; ++n) {
        std::size_t T = 1 + rng() % 40;
        auto b = base_strategy(2, Rational(1, 3), bigmatch());
        auto g = base_strategy(2, Rational(1, 3), h);
        Integer mb = b->start_state(), mg = g->start_state();
        long diff = 0;
        Rational derived(0);
        for (std::size_t t = 0; t < T; ++t) {
            std::size_t a = rng() % 2;
            diff += a == kL ? 1 : -1;
            derived += h.derived.a[1][a];
            mb = b->update(kL, a, mb)[0].first;
            mg = g->update(kL, a, mg)[0].first;
            CHECK(unzigzag(mb) == diff);
            CHECK(Rational(unzigzag(mg)) == -derived);
        }
    }
}

TEST_CASE("reachable states respect the invariants and the space bound") {
    auto s = full_strategy(Rational(1, 2), schedule_loglog(), bigmatch());
    for (std::uint64_t seed : {1ULL, 2ULL}) {
        SimConfig cfg;
        cfg.game = big_match();
        cfg.p1 = observer_variant(*s);
        cfg.p2 = make_adversary(seed == 1 ? "constR" : "doubling", cfg.game);
        cfg.horizon = 1 << 14;
        cfg.seed = seed;
        cfg.record.memory_trace = true;
        Transcript tr = run_play(cfg, 0);
        REQUIRE(!tr.memory_trace.empty());
        for (std::uint64_t m : tr.memory_trace) {
            FullState st = s->decode(Integer(static_cast<unsigned long>(m)));
            CHECK(st.j >= 1);
            CHECK(st.j <= st.i);
            CHECK(st.k >= 0);
            CHECK(st.k < st.i * st.i);
            CHECK(abs(st.l) < st.i * st.i);
            Integer bound(0);
            for (Integer r = 1; r <= st.i; ++r) bound += 4 * r * r * r * r * r;
            CHECK(Integer(static_cast<unsigned long>(m)) < bound);
        }
    }
}

TEST_CASE("distributions are normalized") {
    std::mt19937_64 rng(31);
    std::vector<StrategyPtr> all{base_strategy(2, Rational(1, 3), bigmatch()),
                                 kohlberg_classic(Rational(1, 7), zero_value()),
                                 full_strategy(Rational(1, 3), schedule_loglog(), bigmatch()),
                                 full_strategy(Rational(2, 3), schedule_loglog(), zero_value()),
                                 std::make_shared<StationaryStrategy>(std::vector<Rational>{Rational(1, 3), Rational(2, 3)}, 2)};
    for (const auto& s : all)
        for (int n = 0; n < 100; ++n) {
            Integer m;
            if (auto f = std::dynamic_pointer_cast<const FullStrategy>(s))
                m = f->encode(random_state(rng, 1 + static_cast<long>(rng() % 15), 1));
            else
                m = static_cast<unsigned long>(rng() % 100);
            CHECK(sum(s->action(m)) == 1);
            for (std::size_t a : {kL, kR}) {
                auto u = s->update(kL, a, m);
                CHECK(sum(u) == 1);
                if (s->deterministic_update()) CHECK(u.size() == 1);
            }
        }
}

TEST_CASE("base lemmas hold for both sub-epoch parameterizations") {
    // Index i covers the construction; indices up to 6 cover i + j' for the first epochs.
    std::vector<Rational> xis{Rational(1, 2), Rational(1, 4)};
    CHECK(verify_base_lemma(bigmatch(), 6, 6, xis).empty());
    CHECK(verify_base_lemma(zero_value(), 6, 6, xis).empty());
}

TEST_CASE("make_strategy") {
    AbsorbingGame g = big_match();
    CHECK(make_strategy("base:i=2,xi=1/3", g)->name().find("base") != std::string::npos);
    CHECK(std::dynamic_pointer_cast<const FullStrategy>(make_strategy("full:eps=1/4,sched=loglog", g))->xi() ==
          Rational(1, 16));
    CHECK(std::dynamic_pointer_cast<const FullStrategy>(make_strategy("observer:full:eps=1/4,sched=loglog", g))
              ->observer());
    CHECK(make_strategy("stationary:q=1/3", g)->action(0) == std::vector<Rational>{Rational(2, 3), Rational(1, 3)});
    CHECK_THROWS_AS(make_strategy("base:i=x,xi=1/2", g), UsageError);
    CHECK_THROWS_AS(make_strategy("nope", g), UsageError);
    CHECK_THROWS_AS(make_strategy("full:eps=1/4,sched=loglog", parse_game("1* 0\n0* 1*")), AssumptionViolated);
}
