#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bigmatch/games.hpp"
#include "bigmatch/rng.hpp"

namespace bm {

constexpr std::size_t kL = 0;
constexpr std::size_t kR = 1;

// Player-2 strategy. action() is a function of (round, per-round randomness) only.
class Adversary {
public:
    virtual ~Adversary() = default;
    virtual std::string name() const = 0;
    virtual std::size_t action(std::uint64_t round, BitSource& bits) const = 0;
};

using AdversaryPtr = std::shared_ptr<const Adversary>;

struct MarkovProgram : Adversary {
    enum class Kind { Constant, Periodic, Doubling };
    Kind kind = Kind::Constant;
    std::vector<std::uint16_t> word;  // Constant: one letter; Periodic: the cycle
    std::string label;

    std::string name() const override { return label; }
    std::size_t action(std::uint64_t round, BitSource&) const override;
};

MarkovProgram constant_program(std::size_t column);
MarkovProgram periodic_program(const std::string& lr_word);
// Periodic word of length len with exactly d*len L's, spread evenly.
MarkovProgram density_program(const Rational& d, std::size_t len);
// L^1 R^2 L^4 R^8 ...
MarkovProgram doubling_program();

std::size_t markov_action(const MarkovProgram& p, std::uint64_t round);

struct PhaseAdversaryConfig {
    Rational eps;
    std::size_t k = 0;
};

class PhaseAdversary : public Adversary {
public:
    explicit PhaseAdversary(PhaseAdversaryConfig cfg);
    std::string name() const override;
    std::size_t action(std::uint64_t round, BitSource& bits) const override;

    // Phase containing the round (1-based) and the offset inside it (1-based).
    std::pair<std::size_t, std::uint64_t> locate(std::uint64_t round) const;
    std::uint64_t length(std::size_t phase) const { return lengths_[phase - 1]; }
    std::uint64_t end(std::size_t phase) const { return ends_[phase - 1]; }
    std::uint64_t forced(std::size_t phase) const;  // deterministic R rounds opening the phase

private:
    PhaseAdversaryConfig cfg_;
    std::vector<std::uint64_t> lengths_, ends_, forced_;
    LazyBernoulli coin_;
};

std::size_t phase_adversary_action(const PhaseAdversary& a, std::uint64_t round, BitSource& bits);

// constL | constR | word:<LR> | dens:<r>,len=<n> | doubling | phase:eps=<r>,k=<n>
AdversaryPtr make_adversary(const std::string& spec, const AbsorbingGame& g);
// The fixed acceptance suite.
std::vector<std::string> adversary_suite();

}  // namespace bm
