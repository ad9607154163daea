#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bigmatch/numeric.hpp"
#include "bigmatch/solver.hpp"

using namespace bm;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
};

Run run(const std::string& args) {
    std::string cmd = std::string(BIGMATCH_CLI) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    std::string out;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
    int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch() {
    fs::path d = fs::temp_directory_path() / "bigmatch_cli_test";
    fs::create_directories(d);
    return d;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("value of the Big Match") {
    auto t = std::chrono::steady_clock::now();
    Run r = run("value tests/data/bigmatch.game --eps 1/1048576");
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
    CHECK(r.code == 0);
    Rational v = parse_rational(first_line(r.out));
    CHECK(abs(v - Rational(1, 2)) <= Rational(1, 1 << 20));
    CHECK(secs < 5);
    // Pure in its inputs.
    CHECK(run("value tests/data/bigmatch.game --eps 1/1048576").out == r.out);
    Run d = run("--decimal value tests/data/bigmatch.game --eps 1/1024");
    CHECK(d.code == 0);
    CHECK(d.out.find(" ~ 0.5") != std::string::npos);
}

TEST_CASE("marginal value command") {
    Run r = run("marginal tests/data/matching.game tests/data/perturb.game");
    CHECK(r.code == 0);
    CHECK(first_line(r.out) == "1/4");
    CHECK(run("marginal tests/data/bigmatch.game tests/data/perturb.game").code == 2);
}

TEST_CASE("verify suites") {
    Run r = run("verify --suite base-lemma");
    CHECK(r.code == 0);
    CHECK(r.out.find("0 violations") != std::string::npos);
    CHECK(run("verify --suite lp").code == 0);
    CHECK(run("verify --suite parametric").code == 0);
    CHECK(run("verify --suite reduction").code == 0);
    CHECK(run("verify --suite nope").code == 2);
}

TEST_CASE("usage and input errors exit with 2") {
    CHECK(run("").code == 2);
    CHECK(run("value").code == 2);
    CHECK(run("value missing.game --eps 1/4").code == 2);
    CHECK(run("value tests/data/bigmatch.game --eps abc").code == 2);
    fs::path bad = scratch() / "bad.game";
    std::ofstream(bad) << "1 0\n0 x\n";
    Run r = run("value " + bad.string() + " --eps 1/4");
    CHECK(r.code == 2);
    CHECK(r.out.find("2") != std::string::npos);
    CHECK(run("simulate --game tests/data/bigmatch.game --p1 nothing --p2 constL -T 5").code == 2);
    CHECK(run("simulate --game tests/data/bigmatch.game --p1 stationary:q=0 --p2 constL -T 5 --record zzz").code == 2);
}

TEST_CASE("simulate writes a CSV and a manifest that replays byte for byte") {
    fs::path dir = scratch();
    fs::path csv = dir / "sim.csv", again = dir / "sim_again.csv";
    fs::remove(csv);
    fs::remove(again);
    Run r = run("simulate --game tests/data/bigmatch.game --p1 full:eps=1/5,sched=loglog --p2 phase:eps=1/10,k=3 -T 8192 "
                "--replicas 6 --seed 17 --threads 3 --out " +
                csv.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("mean_payoff ") != std::string::npos);
    std::string body = slurp(csv);
    CHECK(first_line(body) == "replica,payoff,liminf_proxy,limsup_proxy,stopped,stop_round,outcome,max_state,bits_per_round");
    CHECK(std::count(body.begin(), body.end(), '\n') == 7);

    auto manifest = nlohmann::json::parse(slurp(fs::path(csv.string() + ".manifest.json")));
    CHECK(manifest["seed"] == 17);
    CHECK(manifest["tool"] == "bigmatch");
    CHECK(manifest["inputs"].size() == 1);
    CHECK(manifest["inputs"].begin().value().get<std::string>().size() == 64);
    CHECK(manifest.contains("started"));
    CHECK(manifest.contains("finished"));

    Run rr = run("replay " + csv.string() + ".manifest.json --out " + again.string());
    CHECK(rr.code == 0);
    CHECK(slurp(again) == body);

    // A changed input is refused.
    fs::path game = dir / "g.game";
    fs::copy_file("tests/data/bigmatch.game", game, fs::copy_options::overwrite_existing);
    fs::path c2 = dir / "sim2.csv";
    REQUIRE(run("simulate --game " + game.string() + " --p1 stationary:q=0 --p2 constL -T 16 --out " + c2.string()).code ==
            0);
    std::ofstream(game, std::ios::app) << "# edited\n";
    Run bad = run("replay " + c2.string() + ".manifest.json");
    CHECK(bad.code == 2);
    CHECK(bad.out.find("changed") != std::string::npos);
}

TEST_CASE("reduce writes a loadable record") {
    fs::path out = scratch() / "bm.red";
    Run r = run("reduce tests/data/bigmatch.game --eps 2^-4 --fast-thresholds --out " + out.string());
    REQUIRE(r.code == 0);
    CHECK(r.out.find("u ") == 0);
    ReductionOutput red = load_reduction(out.string());
    CHECK(red.eps == Rational(1, 16));
    CHECK(fs::exists(out.string() + ".manifest.json"));
    CHECK(run("reduce tests/data/bigmatch.game --eps 3/7 --out " + out.string()).code == 2);

    // The record drives a lifted strategy in simulate.
    fs::path csv = scratch() / "lifted.csv";
    Run s = run("simulate --game tests/data/bigmatch.game --p1 lifted:" + out.string() +
                "@full:eps=1/5,sched=loglog --p2 constL -T 1024 --replicas 2 --out " + csv.string());
    CHECK(s.code == 0);
}

TEST_CASE("version") {
    Run r = run("--version");
    CHECK(r.code == 0);
    CHECK(r.out.find("1.0.0") != std::string::npos);
}
