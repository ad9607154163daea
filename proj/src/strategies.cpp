#include "bigmatch/strategies.hpp"

#include <algorithm>
#include <climits>
#include <fstream>
#include <map>
#include <sstream>

#include "bigmatch/errors.hpp"

namespace bm {

namespace {

std::uint64_t saturate(const Integer& n) {
    if (n < 0) return 0;
    if (mpz_sizeinbase(n.get_mpz_t(), 2) > 64) return UINT64_MAX;
    std::uint64_t v = 0;
    mpz_export(&v, nullptr, -1, sizeof(v), 0, 0, n.get_mpz_t());
    return v;
}

bool fits_long(const Integer& n) { return n.fits_slong_p(); }

// Conditional Bernoullis for sampling an index of an exact distribution.
struct IndexSampler {
    std::vector<LazyBernoulli> cond;
    std::vector<std::size_t> idx;
    std::size_t last = 0;

    IndexSampler() = default;
    explicit IndexSampler(const std::vector<Rational>& probs) {
        last = probs.size() - 1;
        while (last > 0 && probs[last] == 0) --last;
        Rational rest(1);
        for (std::size_t i = 0; i < last; ++i) {
            if (probs[i] == 0) continue;
            cond.emplace_back(probs[i] / rest);
            idx.push_back(i);
            rest -= probs[i];
        }
    }
    std::size_t draw(BitSource& bits) const {
        for (std::size_t c = 0; c < cond.size(); ++c)
            if (cond[c].draw(bits)) return idx[c];
        return last;
    }
};

void check_distribution(const std::vector<Rational>& p, const char* what) {
    Rational s(0);
    for (const auto& x : p) {
        if (x < 0) throw InvalidParameter(std::string(what) + ": negative probability");
        s += x;
    }
    if (s != 1) throw InvalidParameter(std::string(what) + ": probabilities sum to " + to_string(s));
}

std::vector<Integer> counter_steps(const GeneralizedBigMatch& g) {
    std::vector<Integer> steps;
    if (g.big_match) return {Integer(1), Integer(-1)};
    for (const auto& d : g.derived.a[1]) {
        if (d.get_den() != 1) throw InvalidParameter("counter update needs integer derived entries in row R");
        steps.push_back(-d.get_num());
    }
    return steps;
}

}  // namespace

std::unique_ptr<Runner> MemoryStrategy::runner() const { return std::make_unique<GenericRunner>(*this); }

std::size_t GenericRunner::act(std::uint64_t, BitSource& bits) {
    auto p = s_.action(m_);
    if (p.size() != s_.num_actions()) throw StrategyContractViolation("action distribution has the wrong size");
    Rational total(0);
    for (const auto& x : p) {
        if (x < 0) throw StrategyContractViolation("negative action probability");
        total += x;
    }
    if (total != 1) throw StrategyContractViolation("action distribution sums to " + to_string(total));
    return sample_index(p, bits);
}

void GenericRunner::observe(std::size_t own, std::size_t opp, std::uint64_t, BitSource& bits) {
    auto d = s_.update(own, opp, m_);
    std::vector<Rational> p;
    Rational total(0);
    for (const auto& [m, q] : d) {
        if (q < 0 || m < 0) throw StrategyContractViolation("malformed update distribution");
        p.push_back(q);
        total += q;
    }
    if (d.empty() || total != 1) throw StrategyContractViolation("update distribution does not sum to 1");
    m_ = d[sample_index(p, bits)].first;
}

std::uint64_t GenericRunner::index() const { return saturate(m_); }

Integer zigzag(const Integer& z) { return z >= 0 ? Integer(2 * z) : Integer(-2 * z - 1); }

Integer unzigzag(const Integer& n) {
    if (n < 0) throw InvalidParameter("memory states are naturals");
    Integer half = n / 2;
    return n % 2 == 0 ? half : Integer(-half - 1);
}

Rational base_stop_probability(const Integer& i, const Integer& j, const Rational& xi, unsigned e) {
    Rational head = pow(xi, e);
    Integer n = i + j;
    if (n <= 0) return head;
    if (!n.fits_ulong_p() || n > (1UL << 24)) throw CapExceeded("exponent " + n.get_str() + " is beyond exact evaluation");
    return head * pow(1 - xi, n.get_ui());
}

// ---------------------------------------------------------------- base strategy

BaseStrategy::BaseStrategy(long i, Rational xi, GeneralizedBigMatch game, unsigned stop_power)
    : i_(i), xi_(std::move(xi)), game_(std::move(game)), stop_power_(stop_power) {
    if (xi_ <= 0 || xi_ >= 1) throw InvalidParameter("xi must lie in (0,1)");
    for (const auto& s : counter_steps(game_)) {
        if (!fits_long(s)) throw InvalidParameter("counter step too large");
        steps_.push_back(s.get_si());
    }
}

std::string BaseStrategy::name() const {
    if (stop_power_ == 2 && i_ == 0) return "classic:xi=" + to_string(xi_);
    return "base:i=" + std::to_string(i_) + ",xi=" + to_string(xi_);
}

long BaseStrategy::step(std::size_t a) const {
    if (a >= steps_.size()) throw InvalidAction("opponent column " + std::to_string(a) + " out of range");
    return steps_[a];
}

std::vector<Rational> BaseStrategy::action(const Integer& m) const {
    Rational p = base_stop_probability(Integer(i_), unzigzag(m), xi_, stop_power_);
    return {1 - p, p};
}

StateDist BaseStrategy::update(std::size_t, std::size_t opp, const Integer& m) const {
    return {{zigzag(unzigzag(m) + step(opp)), Rational(1)}};
}

namespace {

class BaseRunner : public Runner {
public:
    explicit BaseRunner(const BaseStrategy& s) : s_(s), floor_(pow(s.xi(), s.stop_power())) {}

    std::size_t act(std::uint64_t, BitSource& bits) override {
        long n = s_.i() + j_;
        if (n <= 0) return floor_.draw(bits) ? 1 : 0;
        return prob(n).draw(bits) ? 1 : 0;
    }
    void observe(std::size_t, std::size_t opp, std::uint64_t, BitSource&) override {
        long st = s_.step(opp);
        if ((st > 0 && j_ > LONG_MAX - st) || (st < 0 && j_ < LONG_MIN - st)) throw CapExceeded("counter overflow");
        j_ += st;
    }
    std::uint64_t index() const override { return saturate(zigzag(Integer(j_))); }
    Integer state() const override { return zigzag(Integer(j_)); }

private:
    const LazyBernoulli& prob(long n) {
        if (static_cast<std::size_t>(n) >= cache_.size()) cache_.resize(static_cast<std::size_t>(n) + 1);
        auto& slot = cache_[static_cast<std::size_t>(n)];
        if (!slot) slot = std::make_unique<LazyBernoulli>(base_stop_probability(s_.i(), Integer(j_), s_.xi(), s_.stop_power()));
        return *slot;
    }

    const BaseStrategy& s_;
    long j_ = 0;
    LazyBernoulli floor_;
    std::vector<std::unique_ptr<LazyBernoulli>> cache_;
};

}  // namespace

std::unique_ptr<Runner> BaseStrategy::runner() const { return std::make_unique<BaseRunner>(*this); }

std::shared_ptr<BaseStrategy> base_strategy(long i, const Rational& xi, const GeneralizedBigMatch& g) {
    return std::make_shared<BaseStrategy>(i, xi, g, 4);
}

std::shared_ptr<BaseStrategy> kohlberg_classic(const Rational& xi, const GeneralizedBigMatch& g) {
    return std::make_shared<BaseStrategy>(0, xi, g, 2);
}

// ---------------------------------------------------------------- schedules

Integer EpochSchedule::F(std::size_t i) const {
    if (i == 0) throw InvalidParameter("epochs start at 1");
    if (loglog) return Integer(1) << static_cast<mp_bitcnt_t>(i);
    if (i <= table.size()) return table[i - 1];
    return table.back() << static_cast<mp_bitcnt_t>(i - table.size());
}

Rational EpochSchedule::raw_sample_prob(std::size_t i) const {
    Integer c = Integer(static_cast<unsigned long>(i));
    Rational p(c * c * c, F(i));
    p.canonicalize();
    return p;
}

Rational EpochSchedule::sample_prob(std::size_t i) const {
    Rational p = raw_sample_prob(i);
    return p > 1 ? Rational(1) : p;
}

EpochSchedule schedule_loglog() {
    EpochSchedule s;
    s.name = "loglog";
    s.loglog = true;
    return s;
}

EpochSchedule schedule_from_f(const std::vector<Integer>& f) {
    if (f.empty()) throw InvalidSchedule("empty f table");
    for (std::size_t t = 1; t < f.size(); ++t)
        if (f[t] < f[t - 1]) throw InvalidSchedule("f decreases at T = " + std::to_string(t + 1));
    if (f.back() <= f.front()) throw InvalidSchedule("f is constant over the supported range");
    EpochSchedule s;
    s.name = "table";
    std::size_t top = f.back().fits_ulong_p() ? f.back().get_ui() : ULONG_MAX;
    top = std::min<std::size_t>(top, f.size());
    std::size_t t = 0;
    for (std::size_t i = 1; i <= top; ++i) {
        while (t < f.size() && f[t] < static_cast<long>(i)) ++t;
        if (t == f.size()) break;
        Integer F(static_cast<unsigned long>(t + 1));
        if (i == 1) F = 1;
        else if (F < 2 * s.table.back()) F = 2 * s.table.back();
        s.table.push_back(F);
    }
    return s;
}

EpochSchedule load_schedule(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open schedule file " + path);
    std::vector<Integer> f;
    std::string tok;
    while (in >> tok) {
        if (tok[0] == '#') {
            std::getline(in, tok);
            continue;
        }
        try {
            f.emplace_back(tok);
        } catch (const std::exception&) {
            throw InvalidSchedule("bad value '" + tok + "' in " + path);
        }
    }
    auto s = schedule_from_f(f);
    s.name = "file:" + path;
    return s;
}

std::vector<std::size_t> schedule_violations(const EpochSchedule& s, std::size_t max_epoch) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i <= max_epoch; ++i)
        if (s.raw_sample_prob(i) > 1) out.push_back(i);
    return out;
}

// ---------------------------------------------------------------- full strategy

FullStrategy::FullStrategy(Rational eps, EpochSchedule schedule, GeneralizedBigMatch game, bool observer, bool clamp)
    : eps_(std::move(eps)), schedule_(std::move(schedule)), game_(std::move(game)), observer_(observer), clamp_(clamp) {
    if (eps_ <= 0 || eps_ >= 1) throw InvalidParameter("eps must lie in (0,1)");
    if (game_.big_match) {
        K_ = 1;
        xi_ = eps_ * eps_;
    } else {
        check_assumption(game_);
        K_ = game_.K;
        xi_ = eps_ * eps_ / (4 * pow(Rational(K_), 4));
    }
    steps_ = counter_steps(game_);
}

std::string FullStrategy::name() const {
    std::string s = "full:eps=" + to_string(eps_) + ",sched=" + schedule_.name;
    return observer_ ? "observer:" + s : s;
}

Rational FullStrategy::sample_prob(std::size_t i) const {
    Rational raw = schedule_.raw_sample_prob(i);
    if (raw > 1) {
        if (!clamp_) throw ScheduleError("i^3/F(i) = " + to_string(raw) + " exceeds 1 in epoch " + std::to_string(i));
        return 1;
    }
    return raw;
}

long FullStrategy::step(std::size_t a) const {
    if (a >= steps_.size()) throw InvalidAction("opponent column " + std::to_string(a) + " out of range");
    return steps_[a].get_si();
}

Integer FullStrategy::epoch_block(const Integer& i) const { return 2 * i * i * i * (2 * K_ * i * i - 1); }

Integer FullStrategy::epoch_base(const Integer& i) const {
    Integer base(0);
    for (Integer r = 1; r < i; ++r) base += epoch_block(r);
    return base;
}

Integer FullStrategy::encode(const FullState& s) const {
    const Integer i2 = s.i * s.i;
    const Integer span = K_ * i2 - 1;
    if (s.i < 1 || s.j < 1 || s.j > s.i || s.k < 0 || s.k >= i2 || abs(s.l) > span || (s.b != 0 && s.b != 1))
        throw InvalidParameter("not a state of the full strategy");
    Integer W = 2 * K_ * i2 - 1;
    return epoch_base(s.i) + ((((s.j - 1) * i2 + s.k) * W + (s.l + span)) * 2 + s.b);
}

FullState FullStrategy::decode(const Integer& m) const {
    if (m < 0) throw InvalidParameter("memory states are naturals");
    Integer i = 1, base = 0;
    while (m >= base + epoch_block(i)) {
        base += epoch_block(i);
        ++i;
    }
    Integer rem = m - base;
    FullState s;
    s.i = i;
    s.b = rem % 2 == 0 ? 0 : 1;
    rem /= 2;
    const Integer i2 = i * i;
    const Integer W = 2 * K_ * i2 - 1;
    s.l = rem % W - (K_ * i2 - 1);
    rem /= W;
    s.k = rem % i2;
    s.j = rem / i2 + 1;
    return s;
}

std::vector<std::pair<FullState, Rational>> FullStrategy::next(const FullState& s, std::size_t opp) const {
    if (opp >= steps_.size()) throw InvalidAction("opponent column " + std::to_string(opp) + " out of range");
    FullState n = s;
    std::size_t epoch = s.i.get_ui();
    if (s.b == 1) {
        if (s.k == s.i * s.i - 1) {
            if (s.j == s.i) {
                n.i = s.i + 1;
                n.j = 1;
                ++epoch;
            } else {
                n.j = s.j + 1;
            }
            n.k = 0;
            n.l = 0;
        } else {
            n.k = s.k + 1;
            n.l = s.l + steps_[opp];
        }
    }
    Rational p = sample_prob(epoch);
    std::vector<std::pair<FullState, Rational>> out;
    if (p > 0) {
        n.b = 1;
        out.emplace_back(n, p);
    }
    if (p < 1) {
        n.b = 0;
        out.emplace_back(n, 1 - p);
    }
    return out;
}

std::vector<Rational> FullStrategy::action(const Integer& m) const {
    FullState s = decode(m);
    if (s.b == 0 || observer_) return {Rational(1), Rational(0)};
    Rational p = base_stop_probability(s.i, s.l, xi_, 4);
    return {1 - p, p};
}

StateDist FullStrategy::update(std::size_t, std::size_t opp, const Integer& m) const {
    StateDist out;
    for (auto& [s, p] : next(decode(m), opp)) out.emplace_back(encode(s), p);
    return out;
}

std::uint64_t FullStrategy::block_length(std::size_t i) const {
    // B(i) = i^4 * ceil(log2(1/xi))
    Integer inv = ceil(1 / xi_);
    std::uint64_t lg = 0;
    while ((Integer(1) << static_cast<mp_bitcnt_t>(lg)) < inv) ++lg;
    std::uint64_t i4 = static_cast<std::uint64_t>(i) * i * i * i;
    return std::max<std::uint64_t>(1, i4 * lg);
}

namespace {

long to_long(long v) { return v; }
long to_long(const Integer& v) { return v.get_si(); }
bool small(long) { return true; }
bool small(const Integer& v) { return v.fits_slong_p() && abs(v) < (1L << 40); }

template <class C>
class FullRunner : public Runner {
public:
    explicit FullRunner(const FullStrategy& s) : s_(s), floor_(pow(s.xi(), 4)) {
        for (std::size_t a = 0; a < s.num_opp_actions(); ++a) {
            if constexpr (std::is_same_v<C, long>)
                steps_.push_back(s.step(a));
            else
                steps_.push_back(s.step_exact(a));
        }
        K1_ = s.K() == 1;
        enter_epoch();
        refresh_index();
    }

    std::size_t act(std::uint64_t round, BitSource& bits) override {
        if (b_ == 0) return 0;
        if (sample_log) sample_log->push_back({i_, j_, static_cast<std::uint32_t>(k_ + 1), round});
        if (block_mode) note_block(round);
        if (s_.observer()) return 0;
        return stop_draw(bits) ? 1 : 0;
    }

    void observe(std::size_t, std::size_t opp, std::uint64_t round, BitSource& bits) override {
        if (opp >= steps_.size()) throw InvalidAction("opponent column out of range");
        if (b_ == 1) {
            const std::uint64_t i2 = static_cast<std::uint64_t>(i_) * i_;
            if (k_ == i2 - 1) {
                if (j_ == i_) {
                    flush_block();
                    ++i_;
                    j_ = 1;
                    epoch_start_ = round + 1;
                    enter_epoch();
                } else {
                    ++j_;
                }
                k_ = 0;
                l_ = 0;
            } else {
                ++k_;
                l_ += steps_[opp];
            }
        }
        int nb = draw_b(bits);
        bool changed = b_ == 1 || nb != b_;
        b_ = nb;
        if (changed) refresh_index();
    }

    std::uint64_t index() const override { return index_; }
    Integer state() const override { return s_.encode(current()); }
    std::uint32_t epoch() const override { return i_; }

private:
    FullState current() const { return {Integer(i_), Integer(j_), Integer(static_cast<unsigned long>(k_)), Integer(l_), b_}; }

    void enter_epoch() {
        Rational p = s_.sample_prob(i_);
        sample_ = LazyBernoulli(p);
        gap_ = LazyGeometric(1 - p);
        remaining_ = 0;
        if (K1_) {
            unsigned __int128 base = 0;
            for (std::uint64_t r = 1; r < i_; ++r) base += 2 * (unsigned __int128)r * r * r * (2 * r * r - 1);
            base_ = base;
        }
        block_len_ = block_mode ? s_.block_length(i_) : 0;
        cur_block_ = UINT64_MAX;
        in_block_ = 0;
    }

    int draw_b(BitSource& bits) {
        if (!block_mode) return sample_.draw(bits) ? 1 : 0;
        if (remaining_ == 0) remaining_ = gap_.draw(bits);
        --remaining_;
        return remaining_ == 0 ? 1 : 0;
    }

    bool stop_draw(BitSource& bits) {
        C n = l_ + static_cast<long>(i_);
        if (n <= 0) return floor_.draw(bits);
        if (small(n)) {
            std::size_t idx = static_cast<std::size_t>(to_long(n));
            if (idx >= cache_.size()) cache_.resize(idx + 1);
            auto& slot = cache_[idx];
            if (!slot) slot = std::make_unique<LazyBernoulli>(base_stop_probability(Integer(i_), Integer(l_), s_.xi(), 4));
            return slot->draw(bits);
        }
        // xi^4 (1-xi)^n as two independent events; the second is only needed when the first occurs.
        if (!floor_.draw(bits)) return false;
        Integer e = Integer(n);
        if (!e.fits_ulong_p() || e > (1UL << 24)) throw CapExceeded("exponent " + e.get_str() + " is beyond exact evaluation");
        return LazyBernoulli(pow(1 - s_.xi(), e.get_ui())).draw(bits);
    }

    void note_block(std::uint64_t round) {
        if (block_len_ == 0) block_len_ = s_.block_length(i_);
        std::uint64_t blk = (round - epoch_start_) / block_len_;
        if (blk != cur_block_) {
            flush_block();
            cur_block_ = blk;
            ++blocks;
        }
        ++in_block_;
    }
    void flush_block() {
        if (in_block_ >= 2) ++crowded_blocks;
        in_block_ = 0;
        cur_block_ = UINT64_MAX;
    }

    void refresh_index() {
        if (K1_) {
            const unsigned __int128 i2 = (unsigned __int128)i_ * i_;
            const unsigned __int128 W = 2 * i2 - 1;
            const long l = to_long(l_);
            unsigned __int128 v = base_ + ((((unsigned __int128)(j_ - 1) * i2 + k_) * W +
                                            (unsigned __int128)(l + static_cast<long>(i2) - 1)) * 2 + b_);
            index_ = v > UINT64_MAX ? UINT64_MAX : static_cast<std::uint64_t>(v);
        } else {
            index_ = saturate(s_.encode(current()));
        }
    }

    const FullStrategy& s_;
    std::vector<C> steps_;
    bool K1_ = false;
    std::uint32_t i_ = 1, j_ = 1;
    std::uint64_t k_ = 0;
    C l_ = 0;
    int b_ = 0;
    LazyBernoulli floor_, sample_;
    LazyGeometric gap_;
    std::uint64_t remaining_ = 0;
    std::vector<std::unique_ptr<LazyBernoulli>> cache_;
    unsigned __int128 base_ = 0;
    std::uint64_t index_ = 0;
    std::uint64_t epoch_start_ = 1, block_len_ = 0, cur_block_ = UINT64_MAX, in_block_ = 0;
};

}  // namespace

std::unique_ptr<Runner> FullStrategy::runner() const {
    bool fits = true;
    for (const auto& s : steps_)
        if (!s.fits_slong_p() || abs(s) > (1L << 20)) fits = false;
    if (fits) return std::make_unique<FullRunner<long>>(*this);
    return std::make_unique<FullRunner<Integer>>(*this);
}

std::shared_ptr<FullStrategy> full_strategy(const Rational& eps, const EpochSchedule& s, const GeneralizedBigMatch& g) {
    return std::make_shared<FullStrategy>(eps, s, g);
}

std::shared_ptr<FullStrategy> observer_variant(const FullStrategy& s) {
    return std::make_shared<FullStrategy>(s.eps(), s.schedule(), s.game(), true);
}

// ---------------------------------------------------------------- stationary

StationaryStrategy::StationaryStrategy(std::vector<Rational> probs, std::size_t opp_actions)
    : probs_(std::move(probs)), opp_(opp_actions) {
    if (probs_.empty()) throw InvalidParameter("stationary strategy needs at least one action");
    check_distribution(probs_, "stationary strategy");
}

std::string StationaryStrategy::name() const {
    if (probs_.size() == 2) return "stationary:q=" + to_string(probs_[1]);
    std::string s = "stationary:";
    for (std::size_t i = 0; i < probs_.size(); ++i) s += (i ? "/" : "") + to_string(probs_[i]);
    return s;
}

namespace {

class StationaryRunner : public Runner {
public:
    explicit StationaryRunner(const std::vector<Rational>& p) : sampler_(p) {}
    std::size_t act(std::uint64_t, BitSource& bits) override { return sampler_.draw(bits); }
    void observe(std::size_t, std::size_t, std::uint64_t, BitSource&) override {}
    std::uint64_t index() const override { return 0; }
    Integer state() const override { return 0; }

private:
    IndexSampler sampler_;
};

}  // namespace

std::unique_ptr<Runner> StationaryStrategy::runner() const { return std::make_unique<StationaryRunner>(probs_); }

// ---------------------------------------------------------------- lifted

LiftedStrategy::LiftedStrategy(StrategyPtr inner, ReductionOutput reduction)
    : inner_(std::move(inner)), red_(std::move(reduction)), j_index_(red_.orig_cols, -1) {
    check_distribution(red_.x, "lifted strategy x");
    check_distribution(red_.x_t2, "lifted strategy x(t2)");
    for (std::size_t c = 0; c < red_.J.size(); ++c) {
        if (red_.J[c] >= red_.orig_cols) throw InvalidInput("J refers to a missing column");
        j_index_[red_.J[c]] = static_cast<long>(c);
    }
    if (!stationary()) {
        if (!inner_) throw InvalidParameter("lifted strategy needs an inner strategy");
        if (inner_->num_actions() != 2 || inner_->num_opp_actions() != red_.J.size())
            throw InvalidParameter("inner strategy does not fit the reduced game");
    }
}

std::string LiftedStrategy::name() const {
    if (stationary()) return std::string("lifted:stationary-") + (red_.pure_row == 1 ? "x_t2" : "x");
    return "lifted:" + inner_->name();
}

Integer LiftedStrategy::start_state() const { return stationary() ? Integer(0) : inner_->start_state(); }

std::vector<Rational> LiftedStrategy::action(const Integer& m) const {
    if (stationary()) return fixed_mixture();
    auto in = inner_->action(m);
    std::vector<Rational> out(red_.orig_rows);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[0] * red_.x[i] + in[1] * red_.x_t2[i];
    return out;
}

StateDist LiftedStrategy::update(std::size_t, std::size_t opp, const Integer& m) const {
    if (opp >= red_.orig_cols) throw InvalidAction("column " + std::to_string(opp) + " out of range");
    if (stationary() || j_index_[opp] < 0) return {{m, Rational(1)}};
    // Inner updates read only the opponent column.
    return inner_->update(0, static_cast<std::size_t>(j_index_[opp]), m);
}

bool LiftedStrategy::deterministic_update() const { return stationary() || inner_->deterministic_update(); }

namespace {

class LiftedRunner : public Runner {
public:
    explicit LiftedRunner(const LiftedStrategy& s) : s_(s), x_(s.reduction().x), xt_(s.reduction().x_t2) {
        inner_ = s.inner()->runner();
    }
    std::size_t act(std::uint64_t round, BitSource& bits) override {
        inner_->sample_log = sample_log;
        inner_->block_mode = block_mode;
        last_ = inner_->act(round, bits);
        return last_ == 0 ? x_.draw(bits) : xt_.draw(bits);
    }
    void observe(std::size_t, std::size_t opp, std::uint64_t round, BitSource& bits) override {
        long c = s_.j_index(opp);
        if (c >= 0) inner_->observe(last_, static_cast<std::size_t>(c), round, bits);
    }
    std::uint64_t index() const override { return inner_->index(); }
    Integer state() const override { return inner_->state(); }
    std::uint32_t epoch() const override { return inner_->epoch(); }

private:
    const LiftedStrategy& s_;
    std::unique_ptr<Runner> inner_;
    IndexSampler x_, xt_;
    std::size_t last_ = 0;
};

}  // namespace

std::unique_ptr<Runner> LiftedStrategy::runner() const {
    if (stationary()) return std::make_unique<StationaryRunner>(fixed_mixture());
    return std::make_unique<LiftedRunner>(*this);
}

std::shared_ptr<LiftedStrategy> lifted_strategy(StrategyPtr inner, const ReductionOutput& r) {
    return std::make_shared<LiftedStrategy>(std::move(inner), r);
}

// ---------------------------------------------------------------- patience

namespace {

void absorb(Rational& best, const Rational& p) {
    if (p > 0) {
        Rational r = 1 / p;
        if (r > best) best = r;
    }
}

}  // namespace

Rational patience(const MemoryStrategy& s, const std::vector<Integer>& states) {
    if (states.empty()) throw EmptyRange("patience of an empty state set");
    Rational best(1);
    for (const auto& m : states) {
        auto act = s.action(m);
        for (const auto& p : act) absorb(best, p);
        for (std::size_t own = 0; own < act.size(); ++own) {
            if (act[own] == 0) continue;
            for (std::size_t opp = 0; opp < s.num_opp_actions(); ++opp)
                for (const auto& [n, p] : s.update(own, opp, m)) absorb(best, p);
        }
    }
    return best;
}

Rational epoch_patience(const FullStrategy& s, std::size_t i) {
    const Integer I(static_cast<unsigned long>(i));
    const Integer i2 = I * I;
    const Integer span = s.K() * i2 - 1;
    if (span > 10000000) throw CapExceeded("epoch block too wide to enumerate");
    Rational best(1);
    // Action classes: b = 0, and b = 1 for each counter value.
    for (const auto& p : s.action(s.encode({I, 1, 0, 0, 0}))) absorb(best, p);
    for (Integer l = -span; l <= span; ++l)
        for (const auto& p : s.action(s.encode({I, 1, 0, l, 1}))) absorb(best, p);
    // Update classes: not sampled, sample inside a sub-epoch, sub-epoch end, epoch end.
    std::vector<FullState> reps{{I, 1, 0, 0, 0}, {I, I, i2 - 1, 0, 1}};
    if (i2 > 1) reps.push_back({I, 1, 0, 0, 1});
    if (i > 1) reps.push_back({I, 1, i2 - 1, 0, 1});
    for (const auto& r : reps) {
        Integer m = s.encode(r);
        auto act = s.action(m);
        for (std::size_t own = 0; own < act.size(); ++own) {
            if (act[own] == 0) continue;
            for (std::size_t opp = 0; opp < s.num_opp_actions(); ++opp)
                for (const auto& [n, p] : s.update(own, opp, m)) absorb(best, p);
        }
    }
    return best;
}

Rational epoch_patience_closed_form(const FullStrategy& s, std::size_t i) {
    Rational best(1);
    if (!s.observer()) {
        const Integer I(static_cast<unsigned long>(i));
        Integer top = I + s.K() * I * I - 1;
        absorb(best, pow(s.xi(), 4) * pow(1 - s.xi(), top.get_ui()));
        absorb(best, 1 - pow(s.xi(), 4));
    }
    for (std::size_t e : {i, i + 1}) {
        Rational p = s.sample_prob(e);
        absorb(best, p);
        absorb(best, 1 - p);
    }
    return best;
}

// ---------------------------------------------------------------- spec parsing

namespace {

std::map<std::string, std::string> parse_kv(const std::string& body, const std::string& spec) {
    std::map<std::string, std::string> kv;
    std::size_t pos = 0;
    while (pos <= body.size()) {
        std::size_t comma = body.find(',', pos);
        std::string part = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        auto eq = part.find('=');
        if (eq == std::string::npos) throw UsageError("malformed strategy spec '" + spec + "'");
        kv[part.substr(0, eq)] = part.substr(eq + 1);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return kv;
}

const std::string& need(const std::map<std::string, std::string>& kv, const std::string& key, const std::string& spec) {
    auto it = kv.find(key);
    if (it == kv.end()) throw UsageError("strategy spec '" + spec + "' lacks '" + key + "'");
    return it->second;
}

Rational rat(const std::string& s, const std::string& spec) {
    Rational r;
    if (!try_parse_rational(s, r)) throw UsageError("bad rational '" + s + "' in '" + spec + "'");
    return r;
}

EpochSchedule parse_schedule(const std::string& s) {
    if (s == "loglog") return schedule_loglog();
    if (s.rfind("file:", 0) == 0) return load_schedule(s.substr(5));
    throw UsageError("unknown schedule '" + s + "'");
}

}  // namespace

StrategyPtr make_strategy(const std::string& spec, const AbsorbingGame& g) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw UsageError("strategy spec needs 'kind:' prefix: '" + spec + "'");
    std::string kind = spec.substr(0, colon), body = spec.substr(colon + 1);
    if (kind == "observer") {
        auto inner = std::dynamic_pointer_cast<const FullStrategy>(make_strategy(body, g));
        if (!inner) throw UsageError("observer wraps a full strategy");
        return observer_variant(*inner);
    }
    if (kind == "lifted") {
        auto at = body.find('@');
        std::string path = body.substr(0, at);
        std::string inner_spec = at == std::string::npos ? "full:eps=1/5,sched=loglog" : body.substr(at + 1);
        ReductionOutput r = load_reduction(path);
        if (r.orig_rows != g.rows() || r.orig_cols != g.cols()) throw UsageError("reduction does not match the game");
        StrategyPtr inner;
        if (r.pure_row < 0) inner = make_strategy(inner_spec, r.D->game);
        return lifted_strategy(inner, r);
    }
    auto kv = parse_kv(body, spec);
    if (kind == "stationary") {
        Rational q = rat(need(kv, "q", spec), spec);
        if (g.rows() != 2) throw UsageError("stationary:q needs a two-row game");
        return std::make_shared<StationaryStrategy>(std::vector<Rational>{1 - q, q}, g.cols());
    }
    GeneralizedBigMatch gbm = make_generalized(g);
    if (kind == "base") {
        long i = 0;
        try {
            i = std::stol(need(kv, "i", spec));
        } catch (const std::logic_error&) {
            throw UsageError("bad base index in '" + spec + "'");
        }
        if (i < 0) throw UsageError("base index must be a natural number");
        return base_strategy(i, rat(need(kv, "xi", spec), spec), gbm);
    }
    if (kind == "classic") return kohlberg_classic(rat(need(kv, "xi", spec), spec), gbm);
    if (kind == "full") {
        auto it = kv.find("sched");
        EpochSchedule s = parse_schedule(it == kv.end() ? "loglog" : it->second);
        return full_strategy(rat(need(kv, "eps", spec), spec), s, gbm);
    }
    throw UsageError("unknown strategy kind '" + kind + "'");
}

}  // namespace bm
