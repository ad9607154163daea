#pragma once

#include <cstdint>
#include <vector>

#include "bigmatch/numeric.hpp"

namespace bm {

std::uint64_t splitmix64(std::uint64_t x);
// Seed of the sub-stream (master, replica, role).
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t replica, std::uint64_t role);

// Fair-bit stream from a counter-based generator. Bits are handed out most significant first and
// only the bits an exact sampler actually inspects are counted as consumed.
class BitSource {
public:
    explicit BitSource(std::uint64_t seed = 0) : key_(seed) {}

    std::uint64_t peek64() {
        if (avail_ < 64) {
            buf_ = (buf_ << 64) | next_word();
            avail_ += 64;
        }
        return static_cast<std::uint64_t>(buf_ >> (avail_ - 64));
    }
    void consume(int n) {
        avail_ -= n;
        buf_ &= avail_ == 0 ? 0 : ((static_cast<unsigned __int128>(1) << avail_) - 1);
        consumed_ += static_cast<std::uint64_t>(n);
    }
    std::uint64_t take64() {
        std::uint64_t w = peek64();
        consume(64);
        return w;
    }
    std::uint64_t consumed() const { return consumed_; }

private:
    std::uint64_t next_word() { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    unsigned __int128 buf_ = 0;
    int avail_ = 0;
    std::uint64_t consumed_ = 0;
};

// Bernoulli(p) for exact rational p: compares a lazy uniform against the binary expansion of p.
class LazyBernoulli {
public:
    LazyBernoulli() = default;
    explicit LazyBernoulli(const Rational& p);

    bool draw(BitSource& bits) const;
    const Rational& p() const { return p_; }

private:
    std::uint64_t word(std::size_t k) const;

    Rational p_;
    int trivial_ = 0;  // 1: always true, -1: always false
    mutable std::vector<std::uint64_t> words_;
};

// Index of the chosen outcome of an exact distribution (sequential conditional Bernoulli draws).
std::size_t sample_index(const std::vector<Rational>& probs, BitSource& bits);

// G >= 1 with P(G > n) = q^n for rational 0 <= q < 1, by exact inversion on a lazy uniform.
class LazyGeometric {
public:
    LazyGeometric() = default;
    explicit LazyGeometric(const Rational& q);
    std::uint64_t draw(BitSource& bits) const;

private:
    // Compare q^n with v / 2^B: sign of q^n - v/2^B.
    int compare_power(std::uint64_t n, const Integer& v, std::size_t B) const;

    Rational q_;
    Integer a_, c_;  // q = a / c
    double log_q_ = 0;
};

}  // namespace bm
