#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bigmatch/games.hpp"
#include "bigmatch/numeric.hpp"
#include "bigmatch/rng.hpp"
#include "bigmatch/solver.hpp"

namespace bm {

using StateDist = std::vector<std::pair<Integer, Rational>>;

// Per-replica mutable play state of a strategy. Sampling is exact; the engine drives it round by round.
class Runner {
public:
    virtual ~Runner() = default;
    virtual std::size_t act(std::uint64_t round, BitSource& bits) = 0;
    virtual void observe(std::size_t own, std::size_t opp, std::uint64_t round, BitSource& bits) = 0;
    // Encoded memory state, saturated at UINT64_MAX.
    virtual std::uint64_t index() const = 0;
    virtual Integer state() const = 0;
    virtual std::uint32_t epoch() const { return 0; }

    std::vector<SampleRecord>* sample_log = nullptr;
    bool block_mode = false;
    std::uint64_t blocks = 0;
    std::uint64_t crowded_blocks = 0;  // blocks holding more than one sample point
};

class MemoryStrategy {
public:
    virtual ~MemoryStrategy() = default;
    virtual std::string name() const = 0;
    virtual std::size_t num_actions() const = 0;
    virtual std::size_t num_opp_actions() const = 0;
    virtual Integer start_state() const = 0;
    virtual std::vector<Rational> action(const Integer& m) const = 0;
    virtual StateDist update(std::size_t own, std::size_t opp, const Integer& m) const = 0;
    virtual bool deterministic_update() const = 0;
    virtual std::unique_ptr<Runner> runner() const;
};

using StrategyPtr = std::shared_ptr<const MemoryStrategy>;

// Exact-map runner usable with any strategy.
class GenericRunner : public Runner {
public:
    explicit GenericRunner(const MemoryStrategy& s) : s_(s), m_(s.start_state()) {}
    std::size_t act(std::uint64_t round, BitSource& bits) override;
    void observe(std::size_t own, std::size_t opp, std::uint64_t round, BitSource& bits) override;
    std::uint64_t index() const override;
    Integer state() const override { return m_; }

private:
    const MemoryStrategy& s_;
    Integer m_;
};

// Zig-zag embedding of integers into naturals.
Integer zigzag(const Integer& z);
Integer unzigzag(const Integer& n);

// R-probability xi^e (1-xi)^(i+j) if i+j > 0, else xi^e.
Rational base_stop_probability(const Integer& i, const Integer& j, const Rational& xi, unsigned e);

class BaseStrategy : public MemoryStrategy {
public:
    // stop_power is 4 for the base strategy and 2 for the classic baseline.
    BaseStrategy(long i, Rational xi, GeneralizedBigMatch game, unsigned stop_power = 4);
    std::string name() const override;
    std::size_t num_actions() const override { return 2; }
    std::size_t num_opp_actions() const override { return game_.game.cols(); }
    Integer start_state() const override { return 0; }
    std::vector<Rational> action(const Integer& m) const override;
    StateDist update(std::size_t own, std::size_t opp, const Integer& m) const override;
    bool deterministic_update() const override { return true; }
    std::unique_ptr<Runner> runner() const override;

    long i() const { return i_; }
    const Rational& xi() const { return xi_; }
    unsigned stop_power() const { return stop_power_; }
    const GeneralizedBigMatch& game() const { return game_; }
    // Counter change on opponent column a.
    long step(std::size_t a) const;

private:
    long i_;
    Rational xi_;
    GeneralizedBigMatch game_;
    unsigned stop_power_;
    std::vector<long> steps_;
};

std::shared_ptr<BaseStrategy> base_strategy(long i, const Rational& xi, const GeneralizedBigMatch& g);
std::shared_ptr<BaseStrategy> kohlberg_classic(const Rational& xi, const GeneralizedBigMatch& g);

struct EpochSchedule {
    std::string name;
    std::vector<Integer> table;  // F(1..table.size()); later epochs double
    bool loglog = false;         // F(i) = 2^i

    Integer F(std::size_t i) const;
    Rational raw_sample_prob(std::size_t i) const;  // i^3 / F(i)
    Rational sample_prob(std::size_t i) const;      // clamped to 1
};

EpochSchedule schedule_loglog();
// f(1..N) non-decreasing; F(i) = min{T : f(T) >= i}, then F(1) = 1 and F(i+1) >= 2F(i) by doubling repair.
EpochSchedule schedule_from_f(const std::vector<Integer>& f);
EpochSchedule load_schedule(const std::string& path);
// Epochs i <= max_epoch with F(i) < i^3.
std::vector<std::size_t> schedule_violations(const EpochSchedule& s, std::size_t max_epoch);

struct FullState {
    Integer i, j, k, l;
    int b = 0;
    bool operator==(const FullState& o) const { return i == o.i && j == o.j && k == o.k && l == o.l && b == o.b; }
};

class FullStrategy : public MemoryStrategy {
public:
    FullStrategy(Rational eps, EpochSchedule schedule, GeneralizedBigMatch game, bool observer = false,
                 bool clamp = true);
    std::string name() const override;
    std::size_t num_actions() const override { return 2; }
    std::size_t num_opp_actions() const override { return game_.game.cols(); }
    Integer start_state() const override { return 0; }
    std::vector<Rational> action(const Integer& m) const override;
    StateDist update(std::size_t own, std::size_t opp, const Integer& m) const override;
    bool deterministic_update() const override { return false; }
    std::unique_ptr<Runner> runner() const override;

    const Rational& eps() const { return eps_; }
    const Rational& xi() const { return xi_; }
    const Integer& K() const { return K_; }
    const EpochSchedule& schedule() const { return schedule_; }
    const GeneralizedBigMatch& game() const { return game_; }
    bool observer() const { return observer_; }
    Rational sample_prob(std::size_t i) const;
    long step(std::size_t a) const;
    const Integer& step_exact(std::size_t a) const { return steps_[a]; }

    FullState start() const { return {1, 1, 0, 0, 0}; }
    Integer encode(const FullState& s) const;
    FullState decode(const Integer& m) const;
    Integer epoch_base(const Integer& i) const;   // smallest number used by epoch i
    Integer epoch_block(const Integer& i) const;  // number of states of epoch i
    // Successor distribution, without numbering.
    std::vector<std::pair<FullState, Rational>> next(const FullState& s, std::size_t opp) const;
    // Block length used by the block-mode sampler.
    std::uint64_t block_length(std::size_t i) const;

private:
    Rational eps_, xi_;
    EpochSchedule schedule_;
    GeneralizedBigMatch game_;
    Integer K_;
    bool observer_, clamp_;
    std::vector<Integer> steps_;
};

std::shared_ptr<FullStrategy> full_strategy(const Rational& eps, const EpochSchedule& s, const GeneralizedBigMatch& g);
std::shared_ptr<FullStrategy> observer_variant(const FullStrategy& s);

class StationaryStrategy : public MemoryStrategy {
public:
    StationaryStrategy(std::vector<Rational> probs, std::size_t opp_actions);
    std::string name() const override;
    std::size_t num_actions() const override { return probs_.size(); }
    std::size_t num_opp_actions() const override { return opp_; }
    Integer start_state() const override { return 0; }
    std::vector<Rational> action(const Integer&) const override { return probs_; }
    StateDist update(std::size_t, std::size_t, const Integer& m) const override { return {{m, Rational(1)}}; }
    bool deterministic_update() const override { return true; }
    std::unique_ptr<Runner> runner() const override;

private:
    std::vector<Rational> probs_;
    std::size_t opp_;
};

class LiftedStrategy : public MemoryStrategy {
public:
    LiftedStrategy(StrategyPtr inner, ReductionOutput reduction);
    std::string name() const override;
    std::size_t num_actions() const override { return red_.orig_rows; }
    std::size_t num_opp_actions() const override { return red_.orig_cols; }
    Integer start_state() const override;
    std::vector<Rational> action(const Integer& m) const override;
    StateDist update(std::size_t own, std::size_t opp, const Integer& m) const override;
    bool deterministic_update() const override;
    std::unique_ptr<Runner> runner() const override;

    bool stationary() const { return red_.pure_row >= 0; }
    const std::vector<Rational>& fixed_mixture() const { return red_.pure_row == 1 ? red_.x_t2 : red_.x; }
    const ReductionOutput& reduction() const { return red_; }
    const StrategyPtr& inner() const { return inner_; }
    // Position of original column c in J, or -1.
    long j_index(std::size_t c) const { return j_index_[c]; }

private:
    StrategyPtr inner_;
    ReductionOutput red_;
    std::vector<long> j_index_;
};

std::shared_ptr<LiftedStrategy> lifted_strategy(StrategyPtr inner, const ReductionOutput& r);

// Max over the states of reciprocals of nonzero action and update probabilities.
Rational patience(const MemoryStrategy& s, const std::vector<Integer>& states);
// Patience of the whole epoch-i block, from the action and update maps on one representative per class.
Rational epoch_patience(const FullStrategy& s, std::size_t i);
// The same quantity from its closed form.
Rational epoch_patience_closed_form(const FullStrategy& s, std::size_t i);

// Strategy spec grammar: base:i=<n>,xi=<r> | classic:xi=<r> | full:eps=<r>,sched=loglog|file:<path>
// | observer:<spec> | lifted:<reduction>[@<spec>] | stationary:q=<r>
StrategyPtr make_strategy(const std::string& spec, const AbsorbingGame& g);

}  // namespace bm
