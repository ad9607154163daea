#include "bigmatch/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <type_traits>

#include "bigmatch/errors.hpp"

namespace bm {

RecordFlags parse_record_flags(const std::string& list) {
    RecordFlags f;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        if (item == "mem") f.memory_trace = true;
        else if (item == "samples") f.sample_log = true;
        else if (item == "bits") f.bits = true;
        else if (item == "actions") f.actions = true;
        else throw UsageError("unknown record flag '" + item + "'");
    }
    return f;
}

namespace {

Integer to_integer(__int128 v) {
    bool neg = v < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
    Integer hi(static_cast<unsigned long>(u >> 64)), lo(static_cast<unsigned long>(static_cast<std::uint64_t>(u)));
    Integer r = (hi << 64) + lo;
    return neg ? Integer(-r) : r;
}
Integer to_integer(const Integer& v) { return v; }

Integer from_u64(std::uint64_t v) { return Integer(static_cast<unsigned long>(v)); }

template <class S>
S make_sum(const Integer& v) {
    if constexpr (std::is_same_v<S, Integer>) return v;
    else return static_cast<S>(v.get_si());
}

template <class S>
S times(const S& a, std::uint64_t n) {
    if constexpr (std::is_same_v<S, Integer>) return a * from_u64(n);
    else return a * static_cast<S>(n);
}

struct Numerators {
    Integer denom;
    std::vector<std::vector<Integer>> num;
    bool small = true;
};

Numerators numerators(const AbsorbingGame& g) {
    Numerators n;
    std::vector<Rational> flat;
    for (const auto& row : g.pi) flat.insert(flat.end(), row.begin(), row.end());
    n.denom = lcm_of_denominators(flat);
    for (const auto& row : g.pi) {
        n.num.emplace_back();
        for (const auto& x : row) {
            Rational s = x * n.denom;
            n.num.back().push_back(s.get_num());
            if (!s.get_num().fits_slong_p() || abs(s.get_num()) > Integer(1L << 62)) n.small = false;
        }
    }
    return n;
}

template <class S>
Transcript play(const SimConfig& cfg, std::uint64_t replica, const Numerators& nums) {
    const auto& g = cfg.game;
    if (!cfg.p1 || !cfg.p2) throw InvalidParameter("simulation needs both players");
    if (cfg.p1->num_actions() != g.rows() || cfg.p1->num_opp_actions() != g.cols())
        throw InvalidParameter("strategy does not fit the game");
    if (cfg.horizon == 0) throw EmptyRange("horizon must be positive");

    BitSource b1(stream_seed(cfg.seed, replica, 1));
    BitSource b2(stream_seed(cfg.seed, replica, 2));
    BitSource bn(stream_seed(cfg.seed, replica, 3));

    std::vector<std::vector<LazyBernoulli>> stop(g.rows());
    for (std::size_t a = 0; a < g.rows(); ++a)
        for (std::size_t c = 0; c < g.cols(); ++c) stop[a].emplace_back(g.omega[a][c]);

    std::vector<std::vector<S>> num(g.rows());
    for (std::size_t a = 0; a < g.rows(); ++a)
        for (std::size_t c = 0; c < g.cols(); ++c) num[a].push_back(make_sum<S>(nums.num[a][c]));

    Transcript tr;
    tr.horizon = cfg.horizon;
    auto runner = cfg.p1->runner();
    runner->block_mode = cfg.block_mode;
    if (cfg.record.sample_log) {
        runner->sample_log = &tr.sample_log;
        tr.sample_log_recorded = true;
    }
    const auto cps = checkpoints(cfg.horizon, cfg.t_min);
    std::vector<std::pair<std::uint64_t, S>> cp_sums;
    std::size_t next_cp = 0;

    S sum{};
    std::uint64_t decade_end = 10;
    std::uint64_t decade_val = 0;
    for (std::uint64_t t = 1; t <= cfg.horizon; ++t) {
        std::uint64_t idx = runner->index();
        if (cfg.record.memory_trace) tr.memory_trace.push_back(idx);
        tr.max_state = std::max(tr.max_state, idx);
        if (t == decade_end) {
            tr.decade_max.push_back(decade_val);
            decade_val = 0;
            decade_end = decade_end > UINT64_MAX / 10 ? UINT64_MAX : decade_end * 10;
        }
        decade_val = std::max(decade_val, idx);

        std::uint32_t ep = runner->epoch();
        std::uint64_t before = b1.consumed();

        std::size_t a = runner->act(t, b1);
        if (a >= g.rows()) throw StrategyContractViolation("action out of range");
        std::size_t c = cfg.p2->action(t, b2);
        if (c >= g.cols()) throw InvalidAction("adversary column out of range");
        sum += num[a][c];
        if (cfg.record.actions) {
            tr.p1_actions.push_back(static_cast<std::uint16_t>(a));
            tr.p2_actions.push_back(static_cast<std::uint16_t>(c));
            tr.rewards.push_back(g.pi[a][c]);
        }
        bool stopped = stop[a][c].draw(bn);
        if (!stopped) runner->observe(a, c, t, b1);

        if (cfg.record.bits) {
            std::size_t e = ep == 0 ? 0 : ep - 1;
            if (tr.epoch_bits.size() <= e) tr.epoch_bits.resize(e + 1);
            tr.epoch_bits[e].first += 1;
            tr.epoch_bits[e].second += b1.consumed() - before;
        }

        if (stopped) {
            tr.stop_round = t;
            tr.outcome = g.pi[a][c];
            // the absorbed tail pays the outcome every round
            while (next_cp < cps.size()) {
                cp_sums.emplace_back(cps[next_cp], sum + times(num[a][c], cps[next_cp] - t));
                ++next_cp;
            }
            sum += times(num[a][c], cfg.horizon - t);
            break;
        }
        if (next_cp < cps.size() && cps[next_cp] == t) cp_sums.emplace_back(t, sum), ++next_cp;
    }
    tr.decade_max.push_back(decade_val);

    tr.reward_sum = Rational(to_integer(sum), nums.denom);
    tr.reward_sum.canonicalize();
    for (const auto& [r, s] : cp_sums) {
        Rational q(to_integer(s), nums.denom);
        q.canonicalize();
        tr.checkpoint_sums.emplace_back(r, q);
    }
    tr.bits_consumed = b1.consumed();
    tr.blocks = runner->blocks;
    tr.crowded_blocks = runner->crowded_blocks;
    return tr;
}

double nearest_rank(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0;
    std::size_t k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    if (k == 0) k = 1;
    return sorted[std::min(k, sorted.size()) - 1];
}

}  // namespace

Transcript run_play(const SimConfig& cfg, std::uint64_t replica) {
    Numerators n = numerators(cfg.game);
    if (n.small) return play<__int128>(cfg, replica, n);
    return play<Integer>(cfg, replica, n);
}

ReplicaSummary summarize(const Transcript& tr, std::uint64_t replica) {
    ReplicaSummary s;
    s.replica = replica;
    s.payoff = finite_payoff(tr);
    s.proxies = payoff_proxies(tr);
    s.stop_round = tr.stop_round;
    s.outcome = tr.outcome;
    s.max_state = tr.max_state;
    s.rounds = tr.stop_round ? *tr.stop_round : tr.horizon;
    s.bits = tr.bits_consumed;
    s.decade_max = tr.decade_max;
    return s;
}

std::uint64_t quantile95(std::vector<std::uint64_t> v) {
    if (v.empty()) throw EmptyRange("quantile of an empty sample");
    std::sort(v.begin(), v.end());
    std::size_t k = (95 * v.size() + 99) / 100;
    return v[std::max<std::size_t>(k, 1) - 1];
}

Integer space_bound(std::uint64_t horizon) {
    if (horizon == 0) throw EmptyRange("horizon must be positive");
    std::uint64_t lg = 0;
    while (lg < 64 && (std::uint64_t{1} << lg) < horizon) ++lg;
    Integer b(static_cast<unsigned long>(2 * lg + 1));
    Integer r = b * b * b;
    return 4 * r * r;
}

bool SimReport::operator==(const SimReport& o) const {
    if (rows.size() != o.rows.size()) return false;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& a = rows[i];
        const auto& b = o.rows[i];
        if (a.replica != b.replica || a.payoff != b.payoff || a.proxies.average != b.proxies.average ||
            a.proxies.liminf != b.proxies.liminf || a.proxies.limsup != b.proxies.limsup ||
            a.stop_round != b.stop_round || a.outcome != b.outcome || a.max_state != b.max_state ||
            a.rounds != b.rounds || a.bits != b.bits || a.decade_max != b.decade_max)
            return false;
    }
    return mean_payoff == o.mean_payoff && stop_rate == o.stop_rate && conditional_outcome == o.conditional_outcome &&
           payoff_q05 == o.payoff_q05 && payoff_q50 == o.payoff_q50 && payoff_q95 == o.payoff_q95 &&
           max_state_q95 == o.max_state_q95 && visited_patience == o.visited_patience &&
           bits_per_round == o.bits_per_round;
}

SimReport run_batch(const SimConfig& cfg, const std::function<void(std::uint64_t, const Transcript&)>& visit) {
    if (cfg.replicas == 0) throw EmptyRange("replicas must be positive");
    Numerators nums = numerators(cfg.game);
    SimReport rep;
    rep.rows.resize(cfg.replicas);
    std::vector<std::set<std::uint64_t>> visited(cfg.record.memory_trace ? cfg.replicas : 0);
    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex fail_mu;

    auto worker = [&] {
        for (;;) {
            std::uint64_t r = next.fetch_add(1);
            if (r >= cfg.replicas) return;
            try {
                Transcript tr = nums.small ? play<__int128>(cfg, r, nums) : play<Integer>(cfg, r, nums);
                if (visit) visit(r, tr);
                if (cfg.record.memory_trace) visited[r].insert(tr.memory_trace.begin(), tr.memory_trace.end());
                rep.rows[r] = summarize(tr, r);
            } catch (...) {
                std::lock_guard<std::mutex> lk(fail_mu);
                if (!failure) failure = std::current_exception();
                next = cfg.replicas;
                return;
            }
        }
    };
    unsigned n = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(std::min<std::uint64_t>(cfg.replicas, 256))));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < n; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    Rational total(0), outcomes(0);
    std::uint64_t stops = 0;
    std::vector<double> payoffs;
    std::vector<std::uint64_t> states;
    double bits = 0;
    for (const auto& row : rep.rows) {
        total += row.payoff;
        if (row.stop_round) {
            ++stops;
            outcomes += *row.outcome;
        }
        payoffs.push_back(to_double(row.payoff));
        states.push_back(row.max_state);
        bits += static_cast<double>(row.bits) / static_cast<double>(row.rounds);
    }
    Rational count(from_u64(cfg.replicas));
    rep.mean_payoff = total / count;
    rep.stop_rate = Rational(from_u64(stops)) / count;
    if (stops) rep.conditional_outcome = outcomes / Rational(from_u64(stops));
    std::sort(payoffs.begin(), payoffs.end());
    rep.payoff_q05 = nearest_rank(payoffs, 0.05);
    rep.payoff_q50 = nearest_rank(payoffs, 0.50);
    rep.payoff_q95 = nearest_rank(payoffs, 0.95);
    rep.max_state_q95 = quantile95(states);
    rep.bits_per_round = bits / static_cast<double>(cfg.replicas);

    if (cfg.record.memory_trace) {
        std::set<std::uint64_t> all;
        for (const auto& v : visited) all.insert(v.begin(), v.end());
        std::vector<Integer> st;
        for (auto s : all)
            if (s != UINT64_MAX) st.push_back(from_u64(s));
        rep.visited_patience = patience(*cfg.p1, st);
    }
    return rep;
}

void write_csv(const SimReport& r, std::ostream& out) {
    out << "replica,payoff,liminf_proxy,limsup_proxy,stopped,stop_round,outcome,max_state,bits_per_round\n";
    for (const auto& row : r.rows) {
        out << row.replica << ',' << to_string(row.payoff) << ',' << to_string(row.proxies.liminf) << ','
            << to_string(row.proxies.limsup) << ',' << (row.stop_round ? 1 : 0) << ',';
        if (row.stop_round) out << *row.stop_round;
        out << ',';
        if (row.outcome) out << to_string(*row.outcome);
        out << ',' << row.max_state << ',' << static_cast<double>(row.bits) / static_cast<double>(row.rounds) << '\n';
    }
}

}  // namespace bm
