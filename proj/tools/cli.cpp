#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "bigmatch/errors.hpp"
#include "bigmatch/sim.hpp"
#include "bigmatch/suites.hpp"

#ifndef BIGMATCH_VERSION
#define BIGMATCH_VERSION "0.0.0"
#endif

using namespace bm;
using json = nlohmann::json;

namespace {

// Exit with code 1 after a report was printed.
struct VerificationFailed {};

std::string sha256_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("cannot open " + path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 14];
    while (f.read(buf, sizeof buf) || f.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(f.gcount()));
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream out;
    for (unsigned i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return out.str();
}

std::string utc_now() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

struct Manifest {
    std::vector<std::string> argv;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> inputs;
    std::string started;

    void write(const std::string& output) const {
        json j;
        j["tool"] = "bigmatch";
        j["version"] = BIGMATCH_VERSION;
        j["command"] = argv;
        j["seed"] = seed ? json(*seed) : json(nullptr);
        json in = json::object();
        for (const auto& p : inputs) in[p] = sha256_file(p);
        j["inputs"] = in;
        j["output"] = output;
        j["started"] = started;
        j["finished"] = utc_now();
        std::ofstream f(output + ".manifest.json");
        f << j.dump(2) << "\n";
    }
};

Rational rat(const std::string& s, const char* what) {
    Rational r;
    if (!try_parse_rational(s, r)) throw UsageError(std::string("malformed ") + what + " '" + s + "'");
    return r;
}

std::string show(const Rational& r, bool decimal) {
    return decimal ? to_string(r) + " ~ " + to_decimal(r, 20) : to_string(r);
}

// "2^-l" or a rational equal to 2^-l.
std::size_t parse_ell(const std::string& s) {
    if (s.rfind("2^-", 0) == 0) {
        std::size_t pos = 0;
        unsigned long l = 0;
        try {
            l = std::stoul(s.substr(3), &pos);
        } catch (const std::exception&) {
            throw UsageError("malformed --eps '" + s + "'");
        }
        if (pos != s.size() - 3 || l == 0) throw UsageError("malformed --eps '" + s + "'");
        return l;
    }
    Rational e = rat(s, "--eps");
    if (e <= 0 || e >= 1 || e.get_num() != 1) throw UsageError("--eps must be 2^-l with l >= 1");
    const Integer& d = e.get_den();
    std::size_t l = mpz_sizeinbase(d.get_mpz_t(), 2) - 1;
    if (Integer(1) << l != d) throw UsageError("--eps must be a power of two");
    return l;
}

MatrixGame matrix_from_file(const std::string& path) {
    AbsorbingGame g = load_game(path);
    for (const auto& row : g.omega)
        for (const auto& w : row)
            if (w != 0) throw UsageError(path + " has stop markers; a matrix game file has none");
    return MatrixGame(g.pi);
}

int report_suite(const SuiteResult& r) {
    std::cout << r.name << ": " << r.checks << " checks, " << r.violations.size() << " violations\n";
    for (const auto& v : r.violations) std::cout << "  " << v << "\n";
    return r.ok() ? 0 : 1;
}

int dispatch(const std::vector<std::string>& args);

int run(int argc, char** argv, const std::vector<std::string>& args) {
    CLI::App app{"Exact solver, reducer and simulator for repeated games with absorbing states", "bigmatch"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("bigmatch ") + BIGMATCH_VERSION);
    bool decimal = false;
    app.add_flag("--decimal", decimal, "Also print a decimal rendering of rationals");

    std::string game_path, eps_s, b_path, out_path, p1, p2, record, suite, manifest_path;
    std::uint64_t horizon = 0, replicas = 1, seed = 0, t_min = 64;
    unsigned threads = 1;
    bool fast = false, block = false;

    auto* value = app.add_subcommand("value", "Approximate the value of an absorbing game");
    value->add_option("game", game_path, "Game file")->required();
    value->add_option("--eps", eps_s, "Accuracy (rational)")->required();

    auto* marginal = app.add_subcommand("marginal", "Marginal value of matrix game A in direction B");
    marginal->add_option("A", game_path, "Matrix game file")->required();
    marginal->add_option("B", b_path, "Perturbation file")->required();

    auto* reduce_cmd = app.add_subcommand("reduce", "Reduce a game to a generalized Big Match");
    reduce_cmd->add_option("game", game_path, "Game file")->required();
    reduce_cmd->add_option("--eps", eps_s, "2^-l")->required();
    reduce_cmd->add_option("--out", out_path, "Reduction file")->required();
    reduce_cmd->add_flag("--fast-thresholds", fast, "Certified search instead of the closed-form thresholds");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo play of a strategy against an adversary");
    sim->add_option("--game", game_path, "Game file")->required();
    sim->add_option("--p1", p1, "Player 1 strategy spec")->required();
    sim->add_option("--p2", p2, "Player 2 adversary spec")->required();
    sim->add_option("-T", horizon, "Horizon")->required()->check(CLI::PositiveNumber);
    sim->add_option("--replicas", replicas, "Replicas")->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "Master seed");
    sim->add_option("--record", record, "Comma list of mem,samples,bits,actions");
    sim->add_option("--out", out_path, "CSV report");
    sim->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sim->add_option("--t-min", t_min, "Smallest checkpoint");
    sim->add_flag("--block-mode", block, "Geometric-gap sampler for the epoch coin");

    auto* verify = app.add_subcommand("verify", "Run verification suites");
    verify->add_option("--suite", suite, "base-lemma|lp|parametric|mills|reduction|all")
        ->required()
        ->check(CLI::IsMember({"base-lemma", "lp", "parametric", "mills", "reduction", "all"}));

    auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("manifest", manifest_path, "Manifest file")->required();
    replay->add_option("--out", out_path, "Replace the recorded output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    Manifest man{args, std::nullopt, {}, utc_now()};

    if (*value) {
        Rational eps = rat(eps_s, "--eps");
        if (eps <= 0) throw UsageError("--eps must be positive");
        std::cout << show(approximate_value(load_game(game_path), eps), decimal) << "\n";
        return 0;
    }
    if (*marginal) {
        std::cout << show(marginal_value(matrix_from_file(game_path), matrix_from_file(b_path)), decimal) << "\n";
        return 0;
    }
    if (*reduce_cmd) {
        std::size_t ell = parse_ell(eps_s);
        ReduceOptions o;
        o.fast_thresholds = fast;
        ReductionOutput r = reduce(load_game(game_path), ell, o);
        {
            std::ofstream f(out_path);
            if (!f) throw InvalidInput("cannot write " + out_path);
            f << render_reduction(r);
        }
        man.inputs = {game_path};
        man.write(out_path);
        std::cout << "u " << show(r.u, decimal) << "\n";
        std::cout << "J";
        for (auto j : r.J) std::cout << ' ' << j;
        std::cout << "\nK " << r.K.get_str() << "\n";
        std::cout << "pure_row " << r.pure_row << "\n";
        return 0;
    }
    if (*sim) {
        SimConfig c;
        c.game = load_game(game_path);
        c.p1 = make_strategy(p1, c.game);
        c.p2 = make_adversary(p2, c.game);
        c.horizon = horizon;
        c.replicas = replicas;
        c.seed = seed;
        c.record = parse_record_flags(record);
        c.block_mode = block;
        c.threads = threads;
        c.t_min = t_min;
        SimReport rep = run_batch(c);
        std::cout << "mean_payoff " << show(rep.mean_payoff, decimal) << "\n";
        std::cout << "stop_rate " << show(rep.stop_rate, decimal) << "\n";
        if (rep.conditional_outcome) std::cout << "conditional_outcome " << show(*rep.conditional_outcome, decimal) << "\n";
        std::cout << "max_state_q95 " << rep.max_state_q95 << "\n";
        std::cout << "bits_per_round " << rep.bits_per_round << "\n";
        if (rep.visited_patience) std::cout << "visited_patience " << to_string(*rep.visited_patience) << "\n";
        if (!out_path.empty()) {
            std::ofstream f(out_path);
            if (!f) throw InvalidInput("cannot write " + out_path);
            write_csv(rep, f);
            f.close();
            man.seed = seed;
            man.inputs = {game_path};
            if (p1.rfind("lifted:", 0) == 0) man.inputs.push_back(p1.substr(7, p1.find('@') - 7));
            man.write(out_path);
        }
        return 0;
    }
    if (*verify) {
        int rc = 0;
        auto want = [&](const char* s) { return suite == "all" || suite == s; };
        if (want("base-lemma")) rc |= report_suite(suite_base_lemma());
        if (want("lp")) rc |= report_suite(suite_lp());
        if (want("parametric")) rc |= report_suite(suite_parametric());
        if (want("mills")) {
            MillsReport m = suite_mills();
            std::size_t bad = m.identity_failures + m.derivative_failures;
            std::cout << "mills: " << m.games << " games, " << bad << " violations (" << m.literal_failures
                      << " games not linear in the perturbation)\n";
            if (bad) rc = 1;
        }
        if (want("reduction")) rc |= report_suite(suite_reduction());
        if (rc) throw VerificationFailed{};
        return 0;
    }
    if (*replay) {
        std::ifstream f(manifest_path);
        if (!f) throw InvalidInput("cannot open " + manifest_path);
        json j = json::parse(f, nullptr, false);
        if (j.is_discarded() || !j.contains("command")) throw InvalidInput("malformed manifest " + manifest_path);
        for (auto& [path, digest] : j["inputs"].items())
            if (sha256_file(path) != digest.get<std::string>())
                throw InvalidInput("input " + path + " changed since the manifest was written");
        std::vector<std::string> again = j["command"].get<std::vector<std::string>>();
        if (!out_path.empty()) {
            for (std::size_t k = 0; k + 1 < again.size(); ++k)
                if (again[k] == "--out") again[k + 1] = out_path;
        }
        return dispatch(again);
    }
    return 2;
}

int dispatch(const std::vector<std::string>& args) {
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    try {
        return run(static_cast<int>(argv.size()), argv.data(), args);
    } catch (const VerificationFailed&) {
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) { return dispatch(std::vector<std::string>(argv, argv + argc)); }
