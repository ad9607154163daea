#include <map>
#include <mutex>

#include <mpfr.h>

#include "bigmatch/errors.hpp"
#include "bigmatch/sim.hpp"

namespace bm {

namespace {

// x^e for any integer e (x != 0 when e < 0).
Rational rpow(const Rational& x, long e) {
    if (e >= 0) return pow(x, static_cast<unsigned long>(e));
    return 1 / pow(x, static_cast<unsigned long>(-e));
}

// Alive mass by counter value, plus the stop statistics so far.
struct DPState {
    std::map<long, Rational> alive;
    Rational win{0}, loss{0};           // Big Match
    Rational e_neg{0}, e_pos{0}, stop{0};  // generalized
};

struct DPStepper {
    const BaseStrategy& s;
    const AbsorbingGame& g;
    std::map<long, Rational> cache;

    const Rational& r_prob(long j) {
        auto it = cache.find(j);
        if (it != cache.end()) return it->second;
        return cache.emplace(j, base_stop_probability(s.i(), j, s.xi(), s.stop_power())).first->second;
    }

    DPState step(const DPState& in, std::size_t c) {
        DPState out;
        out.win = in.win;
        out.loss = in.loss;
        out.e_neg = in.e_neg;
        out.e_pos = in.e_pos;
        out.stop = in.stop;
        const Rational& w = g.omega[1][c];
        const Rational& u = g.pi[1][c];
        long st = s.step(c);
        for (const auto& [j, m] : in.alive) {
            Rational halt = m * r_prob(j) * w;
            if (halt != 0) {
                out.stop += halt;
                if (u < 0) out.e_neg += halt * u;
                if (u > 0) out.e_pos += halt * u;
                if (c == kL) out.loss += halt;
                else out.win += halt;
            }
            Rational rest = m - halt;
            if (rest != 0) out.alive[j + st] += rest;
        }
        return out;
    }
};

DPState start_state() {
    DPState s;
    s.alive[0] = 1;
    return s;
}

}  // namespace

BigMatchStopDP exact_stop_dp(long i, const Rational& xi, std::string_view word, unsigned stop_power, std::size_t cap) {
    if (word.size() > cap) throw CapExceeded("word longer than the DP cap");
    auto gbm = make_generalized(big_match());
    BaseStrategy s(i, xi, gbm, stop_power);
    DPStepper dp{s, gbm.game, {}};
    DPState st = start_state();
    for (char ch : word) {
        if (ch != 'L' && ch != 'R') throw InvalidParameter("words are over {L,R}");
        st = dp.step(st, ch == 'L' ? kL : kR);
    }
    return {st.win, st.loss};
}

GeneralizedStopDP exact_stop_dp(long i, const Rational& xi, const std::vector<std::size_t>& word,
                                const GeneralizedBigMatch& g, unsigned stop_power, std::size_t cap) {
    if (word.size() > cap) throw CapExceeded("word longer than the DP cap");
    BaseStrategy s(i, xi, g, stop_power);
    DPStepper dp{s, g.game, {}};
    DPState st = start_state();
    for (auto c : word) {
        if (c >= g.game.cols()) throw InvalidAction("column out of range");
        st = dp.step(st, c);
    }
    return {st.e_neg, st.e_pos, st.stop};
}

std::vector<std::string> verify_base_lemma(const GeneralizedBigMatch& g, long i_max, std::size_t t_max,
                                           const std::vector<Rational>& xis, unsigned stop_power) {
    std::vector<std::string> out;
    const std::size_t n = g.game.cols();
    const Rational K(g.K);
    const long Kl = g.K.get_si();
    for (const auto& xi : xis) {
        for (long i = 0; i <= i_max; ++i) {
            BaseStrategy s(i, xi, g, stop_power);
            DPStepper dp{s, g.game, {}};
            const Rational bm1 = pow(1 - xi, static_cast<unsigned long>(i)) * pow(xi, 3);
            const Rational g1 = pow(xi, 3) * rpow(1 - xi, i - Kl + 1);
            const Rational g1f = rpow(1 - xi, 1 - 2 * Kl);
            const Rational g2 = pow(xi, 4) * g.min_stop;

            std::vector<std::size_t> word;
            Rational gsum(0);  // sum of pi(L, column) over the word
            std::size_t ells = 0;
            auto label = [&] {
                std::string w;
                for (auto c : word) w += n == 2 ? (c == kL ? "L" : "R") : std::to_string(c) + " ";
                return "xi=" + to_string(xi) + " i=" + std::to_string(i) + " word=" + w;
            };
            auto visit = [&](auto&& self, const DPState& st) -> void {
                if (!word.empty()) {
                    const long T = static_cast<long>(word.size());
                    if (g.big_match) {
                        if (st.loss > bm1 + st.win / (1 - xi)) out.push_back("l-base item 1: " + label());
                        Rational dens(static_cast<long>(ells), T);
                        if (dens < Rational(1, 2) && Rational(T) * (1 - 2 * dens) > i &&
                            st.win + st.loss < pow(xi, 4))
                            out.push_back("l-base item 2: " + label());
                    }
                    if (-st.e_neg > g1 + g1f * st.e_pos) out.push_back("l-base2 item 1: " + label());
                    if (gsum <= Rational(-2 * i) * K && st.stop < g2) out.push_back("l-base2 item 2: " + label());
                }
                if (word.size() == t_max) return;
                for (std::size_t c = 0; c < n; ++c) {
                    word.push_back(c);
                    gsum += g.game.pi[0][c];
                    if (c == kL) ++ells;
                    self(self, dp.step(st, c));
                    if (c == kL) --ells;
                    gsum -= g.game.pi[0][c];
                    word.pop_back();
                }
            };
            visit(visit, start_state());
        }
    }
    return out;
}

std::vector<SubEpochRow> subepoch_stats(const Transcript& tr, const EpochSchedule& s, const Rational& delta) {
    if (!tr.sample_log_recorded) throw NotRecorded("sample log was not recorded");
    std::vector<SubEpochRow> rows;
    std::uint64_t prev_end = 0;
    SubEpochRow cur;
    bool open = false;
    for (const auto& rec : tr.sample_log) {
        if (!open || rec.epoch != cur.epoch || rec.sub_epoch != cur.sub_epoch) {
            cur = SubEpochRow{};
            cur.epoch = rec.epoch;
            cur.sub_epoch = rec.sub_epoch;
            open = true;
        }
        ++cur.samples;
        const std::uint64_t need = static_cast<std::uint64_t>(rec.epoch) * rec.epoch;
        if (rec.sample == need) {
            cur.length = rec.round - prev_end;
            prev_end = rec.round;
            Rational p = s.raw_sample_prob(rec.epoch);
            cur.clamped = p >= 1;
            if (!cur.clamped) {
                Rational mean = Rational(s.F(rec.epoch)) / static_cast<long>(rec.epoch);
                Rational len(Integer(static_cast<unsigned long>(cur.length)));
                cur.flagged = len < (1 - delta) * mean || len > (1 + delta) * mean;
            }
            rows.push_back(cur);
            open = false;
        }
    }
    return rows;
}

namespace {

struct Mpfr {
    mpfr_t v;
    Mpfr() { mpfr_init2(v, 256); }
    ~Mpfr() { mpfr_clear(v); }
    Mpfr(const Mpfr&) = delete;
    Mpfr& operator=(const Mpfr&) = delete;
};

// exp(x) for rational x, returned as the exact rational value of the 256-bit result.
Rational exp_q(const Rational& x) {
    Mpfr a;
    mpfr_set_q(a.v, x.get_mpq_t(), MPFR_RNDN);
    mpfr_exp(a.v, a.v, MPFR_RNDN);
    Rational r;
    mpfr_get_q(r.get_mpq_t(), a.v);
    return r;
}

}  // namespace

Rational tail_bound(TailKind kind, const TailParams& p) {
    switch (kind) {
        case TailKind::ChernoffUpper:
            if (p.eps <= 0 || p.mean < 0) throw InvalidParameter("chernoff upper needs eps > 0 and mean >= 0");
            return exp_q(-p.eps * p.eps * p.mean / (2 + p.eps));
        case TailKind::ChernoffLower:
            if (p.eps <= 0 || p.eps >= 1 || p.mean < 0)
                throw InvalidParameter("chernoff lower needs 0 < eps < 1 and mean >= 0");
            return exp_q(-p.eps * p.eps * p.mean / 2);
        case TailKind::Hoeffding: {
            if (p.t <= 0 || p.ranges.empty()) throw InvalidParameter("hoeffding needs t > 0 and at least one range");
            Rational s(0);
            for (const auto& r : p.ranges) {
                if (r <= 0) throw InvalidParameter("hoeffding ranges must be positive");
                s += r * r;
            }
            return 2 * exp_q(-2 * p.t * p.t / s);
        }
    }
    throw InvalidParameter("unknown tail bound");
}

Rational goodbalance_bound(const Rational& delta, std::size_t M, std::size_t i_max) {
    if (delta <= 0 || delta >= Rational(1, 4)) throw InvalidParameter("goodbalance needs 0 < delta < 1/4");
    const Rational r = delta / (1 - delta);
    const Rational c = r * r / (2 + r);
    Rational sum(0);
    for (std::size_t i = std::max<std::size_t>(M, 1); i <= i_max; ++i) {
        Rational i2(static_cast<long>(i * i));
        sum += static_cast<long>(i) * (exp_q(-c * (1 - delta) * i2) + exp_q(-delta * delta / 2 * (1 + delta) * i2));
    }
    return sum;
}

Rational BitReport::amortized(std::uint32_t min_epoch) const {
    std::uint64_t rounds = 0, bits = 0;
    for (const auto& e : epochs)
        if (e.epoch >= min_epoch) rounds += e.rounds, bits += e.bits;
    if (rounds == 0) throw EmptyRange("no rounds in the requested epochs");
    return Rational(Integer(static_cast<unsigned long>(bits)), Integer(static_cast<unsigned long>(rounds)));
}

BitReport bit_accounting(const SimConfig& cfg) {
    SimConfig c = cfg;
    c.record.bits = true;
    BitReport rep;
    std::mutex mu;
    std::vector<Transcript> keep(cfg.replicas);
    run_batch(c, [&](std::uint64_t r, const Transcript& tr) {
        std::lock_guard<std::mutex> lk(mu);
        keep[r].epoch_bits = tr.epoch_bits;
        keep[r].blocks = tr.blocks;
        keep[r].crowded_blocks = tr.crowded_blocks;
    });
    for (const auto& tr : keep) {
        for (std::size_t e = 0; e < tr.epoch_bits.size(); ++e) {
            if (rep.epochs.size() <= e) rep.epochs.push_back({static_cast<std::uint32_t>(e + 1), 0, 0});
            rep.epochs[e].rounds += tr.epoch_bits[e].first;
            rep.epochs[e].bits += tr.epoch_bits[e].second;
        }
        rep.blocks += tr.blocks;
        rep.crowded_blocks += tr.crowded_blocks;
    }
    return rep;
}

}  // namespace bm
