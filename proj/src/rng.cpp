#include "bigmatch/rng.hpp"

#include <cmath>

#include "bigmatch/errors.hpp"

namespace bm {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t replica, std::uint64_t role) {
    return splitmix64(splitmix64(splitmix64(master) ^ replica) ^ (role * 0xd1b54a32d192ed03ULL));
}

LazyBernoulli::LazyBernoulli(const Rational& p) : p_(p) {
    if (p >= 1)
        trivial_ = 1;
    else if (p <= 0)
        trivial_ = -1;
}

std::uint64_t LazyBernoulli::word(std::size_t k) const {
    while (words_.size() <= k) {
        std::size_t j = words_.size();
        Integer scaled = p_.get_num();
        scaled <<= static_cast<mp_bitcnt_t>(64 * (j + 1));
        Integer q;
        mpz_fdiv_q(q.get_mpz_t(), scaled.get_mpz_t(), p_.get_den().get_mpz_t());
        Integer low;
        mpz_fdiv_r_2exp(low.get_mpz_t(), q.get_mpz_t(), 64);
        std::uint64_t w = 0;
        mpz_export(&w, nullptr, -1, sizeof(w), 0, 0, low.get_mpz_t());
        words_.push_back(w);
    }
    return words_[k];
}

bool LazyBernoulli::draw(BitSource& bits) const {
    if (trivial_) return trivial_ > 0;
    for (std::size_t k = 0;; ++k) {
        std::uint64_t u = bits.peek64();
        std::uint64_t w = word(k);
        if (u != w) {
            bits.consume(__builtin_clzll(u ^ w) + 1);
            return u < w;
        }
        bits.consume(64);
    }
}

std::size_t sample_index(const std::vector<Rational>& probs, BitSource& bits) {
    if (probs.empty()) throw StrategyContractViolation("empty distribution");
    Rational rest(1);
    std::size_t last = probs.size() - 1;
    while (last > 0 && probs[last] == 0) --last;
    for (std::size_t i = 0; i < last; ++i) {
        if (probs[i] == 0) continue;
        if (LazyBernoulli(probs[i] / rest).draw(bits)) return i;
        rest -= probs[i];
    }
    return last;
}

LazyGeometric::LazyGeometric(const Rational& q) : q_(q), a_(q.get_num()), c_(q.get_den()) {
    if (q < 0 || q >= 1) throw InvalidParameter("geometric draw needs 0 <= q < 1");
    if (q > 0) log_q_ = std::log(to_double(q));
}

int LazyGeometric::compare_power(std::uint64_t n, const Integer& v, std::size_t B) const {
    Integer lhs, rhs;
    mpz_pow_ui(lhs.get_mpz_t(), a_.get_mpz_t(), n);
    lhs <<= static_cast<mp_bitcnt_t>(B);
    mpz_pow_ui(rhs.get_mpz_t(), c_.get_mpz_t(), n);
    rhs *= v;
    return cmp(lhs, rhs);
}

std::uint64_t LazyGeometric::draw(BitSource& bits) const {
    if (q_ == 0) return 1;
    Integer v(0);
    for (std::size_t k = 1;; ++k) {
        const std::size_t B = 64 * k;
        std::uint64_t top = bits.peek64();
        Integer word;
        mpz_import(word.get_mpz_t(), 1, -1, sizeof(top), 0, 0, &top);
        Integer vk = (v << 64) + word;

        if (vk != 0) {
            double U = std::ldexp(mpz_get_d(vk.get_mpz_t()), -static_cast<int>(B));
            double est = std::floor(std::log(U) / log_q_) + 1;
            std::uint64_t n = est < 1 ? 1 : est > 1e15 ? static_cast<std::uint64_t>(1e15) : static_cast<std::uint64_t>(est);
            while (compare_power(n, vk, B) > 0) ++n;
            while (n > 1 && compare_power(n - 1, vk, B) <= 0) --n;

            // The cell [q^n, q^(n-1)) must contain the whole interval [vk, vk+1) / 2^B.
            Integer hi_bound;
            if (n == 1) {
                hi_bound = Integer(1) << static_cast<mp_bitcnt_t>(B);
            } else {
                Integer num, den;
                mpz_pow_ui(num.get_mpz_t(), a_.get_mpz_t(), n - 1);
                num <<= static_cast<mp_bitcnt_t>(B);
                mpz_pow_ui(den.get_mpz_t(), c_.get_mpz_t(), n - 1);
                mpz_fdiv_q(hi_bound.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
            }
            if (vk + 1 <= hi_bound) {
                Integer num, den, lo_bound;
                mpz_pow_ui(num.get_mpz_t(), a_.get_mpz_t(), n);
                num <<= static_cast<mp_bitcnt_t>(B);
                mpz_pow_ui(den.get_mpz_t(), c_.get_mpz_t(), n);
                mpz_cdiv_q(lo_bound.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
                for (int b = 1; b <= 64; ++b) {
                    mp_bitcnt_t shift = static_cast<mp_bitcnt_t>(64 - b);
                    Integer lo = (vk >> shift) << shift;
                    Integer hi = lo + (Integer(1) << shift);
                    if (lo >= lo_bound && hi <= hi_bound) {
                        bits.consume(b);
                        return n;
                    }
                }
            }
        }
        bits.consume(64);
        v = vk;
    }
}

}  // namespace bm
