#include "bigmatch/adversaries.hpp"

#include <algorithm>

#include "bigmatch/errors.hpp"

namespace bm {

std::size_t MarkovProgram::action(std::uint64_t round, BitSource&) const { return markov_action(*this, round); }

std::size_t markov_action(const MarkovProgram& p, std::uint64_t round) {
    if (round == 0) throw InvalidParameter("rounds start at 1");
    switch (p.kind) {
        case MarkovProgram::Kind::Constant:
            return p.word[0];
        case MarkovProgram::Kind::Periodic:
            return p.word[(round - 1) % p.word.size()];
        case MarkovProgram::Kind::Doubling:
            return (63 - __builtin_clzll(round)) % 2 == 0 ? kL : kR;
    }
    return kL;
}

MarkovProgram constant_program(std::size_t column) {
    MarkovProgram p;
    p.kind = MarkovProgram::Kind::Constant;
    p.word = {static_cast<std::uint16_t>(column)};
    p.label = column == kL ? "constL" : column == kR ? "constR" : "const" + std::to_string(column);
    return p;
}

MarkovProgram periodic_program(const std::string& lr_word) {
    if (lr_word.empty()) throw InvalidParameter("empty word");
    MarkovProgram p;
    p.kind = MarkovProgram::Kind::Periodic;
    for (char c : lr_word) {
        if (c != 'L' && c != 'R') throw InvalidParameter("words are over {L,R}");
        p.word.push_back(c == 'L' ? kL : kR);
    }
    p.label = "word:" + lr_word;
    return p;
}

MarkovProgram density_program(const Rational& d, std::size_t len) {
    if (len == 0 || d < 0 || d > 1) throw InvalidParameter("density program needs 0 <= d <= 1 and len >= 1");
    Rational ls = d * static_cast<long>(len);
    if (ls.get_den() != 1) throw InvalidParameter("d * len must be an integer");
    std::string w;
    for (std::size_t t = 0; t < len; ++t) {
        Integer before = floor(d * static_cast<long>(t));
        Integer after = floor(d * static_cast<long>(t + 1));
        w += after > before ? 'L' : 'R';
    }
    MarkovProgram p = periodic_program(w);
    p.label = "dens:" + to_string(d) + ",len=" + std::to_string(len);
    return p;
}

MarkovProgram doubling_program() {
    MarkovProgram p;
    p.kind = MarkovProgram::Kind::Doubling;
    p.label = "doubling";
    return p;
}

PhaseAdversary::PhaseAdversary(PhaseAdversaryConfig cfg) : cfg_(std::move(cfg)), coin_(cfg_.eps) {
    if (cfg_.eps <= 0 || cfg_.eps > Rational(1, 2)) throw InvalidParameter("phase adversary needs 0 < eps <= 1/2");
    Rational inv = 1 / cfg_.eps;
    std::uint64_t total = 0;
    for (std::size_t i = 1;; ++i) {
        Integer len = ceil(pow(inv, i));
        Integer f = ceil((1 - cfg_.eps) * Rational(len));
        if (mpz_sizeinbase(len.get_mpz_t(), 2) > 62) break;
        std::uint64_t l = len.get_ui();
        if (total > UINT64_MAX / 4 - l) break;
        total += l;
        lengths_.push_back(l);
        ends_.push_back(total);
        forced_.push_back(i <= cfg_.k ? 0 : f.get_ui());
    }
}

std::string PhaseAdversary::name() const { return "phase:eps=" + to_string(cfg_.eps) + ",k=" + std::to_string(cfg_.k); }

std::pair<std::size_t, std::uint64_t> PhaseAdversary::locate(std::uint64_t round) const {
    if (round == 0) throw InvalidParameter("rounds start at 1");
    auto it = std::lower_bound(ends_.begin(), ends_.end(), round);
    if (it == ends_.end()) throw CapExceeded("round beyond the tabulated phases");
    std::size_t phase = static_cast<std::size_t>(it - ends_.begin()) + 1;
    std::uint64_t start = phase == 1 ? 0 : ends_[phase - 2];
    return {phase, round - start};
}

std::uint64_t PhaseAdversary::forced(std::size_t phase) const { return forced_[phase - 1]; }

std::size_t PhaseAdversary::action(std::uint64_t round, BitSource& bits) const {
    auto [phase, offset] = locate(round);
    if (offset <= forced_[phase - 1]) return kR;
    return coin_.draw(bits) ? kR : kL;
}

std::size_t phase_adversary_action(const PhaseAdversary& a, std::uint64_t round, BitSource& bits) {
    return a.action(round, bits);
}

AdversaryPtr make_adversary(const std::string& spec, const AbsorbingGame& g) {
    auto check = [&](AdversaryPtr a, std::size_t need_cols) {
        if (g.cols() < need_cols) throw UsageError("adversary '" + spec + "' needs columns L and R");
        return a;
    };
    if (spec == "constL") return check(std::make_shared<MarkovProgram>(constant_program(kL)), 1);
    if (spec == "constR") return check(std::make_shared<MarkovProgram>(constant_program(kR)), 2);
    if (spec == "doubling") return check(std::make_shared<MarkovProgram>(doubling_program()), 2);
    auto colon = spec.find(':');
    std::string kind = spec.substr(0, colon);
    std::string body = colon == std::string::npos ? "" : spec.substr(colon + 1);
    try {
        if (kind == "word") return check(std::make_shared<MarkovProgram>(periodic_program(body)), 2);
        if (kind == "dens") {
            auto comma = body.find(",len=");
            if (comma == std::string::npos) throw UsageError("dens needs ',len=<n>'");
            Rational d = parse_rational(body.substr(0, comma));
            std::size_t len = std::stoul(body.substr(comma + 5));
            return check(std::make_shared<MarkovProgram>(density_program(d, len)), 2);
        }
        if (kind == "phase") {
            PhaseAdversaryConfig cfg;
            auto eps_at = body.find("eps=");
            auto k_at = body.find(",k=");
            if (eps_at != 0 || k_at == std::string::npos) throw UsageError("phase needs eps=<r>,k=<n>");
            cfg.eps = parse_rational(body.substr(4, k_at - 4));
            cfg.k = std::stoul(body.substr(k_at + 3));
            return check(std::make_shared<PhaseAdversary>(cfg), 2);
        }
    } catch (const InvalidInput& e) {
        throw UsageError(e.what());
    } catch (const InvalidParameter& e) {
        throw UsageError(e.what());
    } catch (const std::invalid_argument&) {
        throw UsageError("malformed adversary spec '" + spec + "'");
    }
    throw UsageError("unknown adversary '" + spec + "'");
}

std::vector<std::string> adversary_suite() {
    return {"constL",         "constR",         "dens:1/4,len=4", "dens:2/5,len=5",
            "dens:1/2,len=2", "dens:3/4,len=4", "doubling",       "phase:eps=1/10,k=3"};
}

}  // namespace bm
