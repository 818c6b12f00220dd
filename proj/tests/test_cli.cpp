#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <map>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "reliance/cli.hpp"

namespace fs = std::filesystem;
using namespace reliance::cli;

namespace {

const fs::path kV5 = fs::path(RELIANCE_CONFIG_DIR) / "paper-v5.cfg";
const fs::path kRecovery = fs::path(RELIANCE_CONFIG_DIR) / "recovery.cfg";

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("reliance_cli_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& name) const { return path / name; }
};

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd =
        env + " " + RELIANCE_SIM_EXE + " " + args + " >/dev/null 2>&1";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::size_t lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

}  // namespace

TEST_CASE("simulate writes a trace and validates the mask") {
    TempDir tmp;
    const auto out = tmp / "trace.csv";
    const std::string base = "simulate --config " + kRecovery.string() + " --deterministic";
    CHECK(run_cli(base + " --mask 1000000001 --out " + out.string()) == 0);
    const auto text = slurp(out);
    CHECK(text.rfind("episode_id,task_index,attacked,", 0) == 0);
    CHECK(lines(text) == 11);
    // dip after the first attack, recovery by task 3, dip again on the last
    CHECK(text.find("\n0,2,0,") != std::string::npos);
    CHECK(text.find("HUMAN") != std::string::npos);

    CHECK(run_cli(base + " --mask 0000000000 --out " + out.string()) == 0);
    CHECK(slurp(out).find("ATTACKED_MODEL") == std::string::npos);

    const auto bad = tmp / "bad.csv";
    CHECK(run_cli(base + " --mask 100 --out " + bad.string()) == 1);
    CHECK(run_cli(base + " --mask 10000z0001 --out " + bad.string()) == 1);
    CHECK_FALSE(fs::exists(bad));

    CHECK(run_cli(base + " --mask 1000000001 --replications 3 --out " + out.string()) == 0);
    CHECK(lines(slurp(out)) == 31);
}

TEST_CASE("enumerate flags best and worst and respects the cap") {
    TempDir tmp;
    const auto out = tmp / "strategies.csv";
    const std::string base = "enumerate --config " + kRecovery.string();
    CHECK(run_cli(base + " --deterministic --k 2 --out " + out.string()) == 0);
    CHECK(lines(slurp(out)) == 46);
    CHECK(run_cli(base + " --deterministic --k 0 --out " + out.string()) == 0);
    CHECK(lines(slurp(out)) == 2);
    CHECK(run_cli(base + " --deterministic --k 10 --out " + out.string()) == 0);
    CHECK(slurp(out).find(",1111111111,10,") != std::string::npos);
    CHECK(run_cli(base + " --deterministic --k 11 --out " + out.string()) == 1);

    const auto big = tmp / "big.cfg";
    write(big, R"({"episode": {"n": 40}})");
    const auto refused = tmp / "refused.csv";
    CHECK(run_cli("enumerate --config " + big.string() + " --k 20 --out " + refused.string()) == 1);
    CHECK_FALSE(fs::exists(refused));

    EnumerateOptions opts;
    opts.config = kRecovery;
    opts.budgets = {2};
    opts.deterministic = true;
    opts.format = Format::Json;
    opts.out = tmp / "strategies.json";
    const auto outcome = cmd_enumerate(opts);
    REQUIRE(outcome.status == kOk);
    const auto doc = nlohmann::json::parse(slurp(opts.out));
    CHECK(doc["by_attack_count"][0]["best_mask"] == "1000000001");
    CHECK(doc["by_attack_count"][0]["worst_mask"] == "1100000000");
    CHECK(doc["strategies"].size() == 45);
}

TEST_CASE("analytic closed forms and errors") {
    TempDir tmp;
    AnalyticOptions opts;
    opts.out = tmp / "analytic.json";
    opts.format = Format::Json;
    opts.recovery_k = 2;
    REQUIRE(cmd_analytic(opts).status == kOk);
    const auto doc = nlohmann::json::parse(slurp(*opts.out));
    std::map<std::string, double> as;
    for (const auto& f : doc["families"]) as[f["family"]] = f["attack_score"];
    CHECK(as["first"] == doctest::Approx(0.19));
    CHECK(as["last"] == doctest::Approx(0.28));
    CHECK(as["last_two"] == doctest::Approx(0.27));
    CHECK(as["first_and_last"] == doctest::Approx(0.35));

    CHECK(run_cli("analytic --e-h 0.15 --e-m 0.15 --family first") == 0);
    CHECK(run_cli("analytic --family middle") == 1);
    CHECK(run_cli("analytic --n 2 --family last_two") == 1);
    CHECK(run_cli("analytic --e-h 1.5") == 1);
    CHECK(run_cli("analytic --config " + kRecovery.string() + " --family first_and_last") == 0);
    CHECK(run_cli("analytic --config " + kV5.string() + " --family first_and_last") == 1);
}

TEST_CASE("sweep writes one CSV per parameter plus a summary") {
    TempDir tmp;
    const std::string base = "sweep --config " + kV5.string() + " --replications 20 --k 0,1,2";
    CHECK(run_cli(base + " --param model_acc --values 0.2,0.4,0.6,0.8 --out " +
                  (tmp / "a").string()) == 0);
    const auto csv = slurp(tmp / "a" / "sweep_model_acc.csv");
    CHECK(lines(csv) == 13);
    const auto summary = nlohmann::json::parse(slurp(tmp / "a" / "summary.json"));
    CHECK(summary["metadata"]["replications"] == 20);
    CHECK(summary["metadata"]["config_hash"].get<std::string>().size() == 16);
    CHECK(summary["sweeps"][0]["optimal"].size() == 4);

    CHECK(run_cli(base + " --param combined_acc --values 0.2:0.8 --out " + (tmp / "c").string()) == 0);
    CHECK(slurp(tmp / "c" / "sweep_combined_acc.csv").find("combined_acc,0.2:0.8,") !=
          std::string::npos);

    CHECK(run_cli(base + " --param model_acc --values \"\" --out " + (tmp / "e").string()) == 1);
    CHECK(run_cli(base + " --param model_acc --values 1.4 --out " + (tmp / "e").string()) == 1);
    CHECK(run_cli(base + " --param model_acc --values abc --out " + (tmp / "e").string()) == 1);
    CHECK(run_cli(base + " --param alpha --out " + (tmp / "e").string()) == 1);
    CHECK_FALSE(fs::exists(tmp / "e" / "summary.json"));
}

TEST_CASE("identical flags and seed give byte-identical outputs") {
    TempDir tmp;
    const std::string sim = "simulate --config " + kV5.string() + " --mask 0110000000 --replications 5";
    CHECK(run_cli(sim + " --seed 42 --out " + (tmp / "s1.csv").string()) == 0);
    CHECK(run_cli(sim + " --seed 42 --out " + (tmp / "s2.csv").string()) == 0);
    CHECK(slurp(tmp / "s1.csv") == slurp(tmp / "s2.csv"));
    CHECK(run_cli(sim + " --seed 43 --out " + (tmp / "s3.csv").string()) == 0);
    CHECK(slurp(tmp / "s1.csv") != slurp(tmp / "s3.csv"));

    // environment seed sits between the flag and the config
    CHECK(run_cli(sim + " --out " + (tmp / "e1.csv").string(), "RELIANCE_SIM_SEED=42") == 0);
    CHECK(slurp(tmp / "e1.csv") == slurp(tmp / "s1.csv"));
    CHECK(run_cli(sim + " --seed 43 --out " + (tmp / "e2.csv").string(), "RELIANCE_SIM_SEED=42") == 0);
    CHECK(slurp(tmp / "e2.csv") == slurp(tmp / "s3.csv"));
    CHECK(run_cli(sim + " --out " + (tmp / "e3.csv").string(), "RELIANCE_SIM_SEED=oops") == 1);

    const std::string en = "enumerate --config " + kV5.string() + " --k 1,2 --replications 30";
    CHECK(run_cli(en + " --jobs 1 --out " + (tmp / "n1.csv").string()) == 0);
    CHECK(run_cli(en + " --jobs 4 --out " + (tmp / "n2.csv").string()) == 0);
    CHECK(slurp(tmp / "n1.csv") == slurp(tmp / "n2.csv"));

    const std::string sw = "sweep --config " + kV5.string() +
                           " --param reliance_threshold --values 0.1,0.5,0.9 --k 0,1 --replications 20 --seed 5";
    CHECK(run_cli(sw + " --jobs 1 --out " + (tmp / "w1").string()) == 0);
    CHECK(run_cli(sw + " --jobs 3 --out " + (tmp / "w2").string()) == 0);
    CHECK(slurp(tmp / "w1" / "sweep_reliance_threshold.csv") ==
          slurp(tmp / "w2" / "sweep_reliance_threshold.csv"));
    CHECK(slurp(tmp / "w1" / "summary.json") == slurp(tmp / "w2" / "summary.json"));
}

TEST_CASE("fault injection maps onto exit codes") {
    TempDir tmp;
    const auto out = tmp / "t.csv";
    // validation errors
    CHECK(run_cli("") == 1);
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("simulate --mask 1") == 1);
    CHECK(run_cli("simulate --config /no/such.cfg --mask 1 --out " + out.string()) == 1);
    const auto unknown = tmp / "unknown.cfg";
    write(unknown, R"({"reliance": {"beta": 1}})");
    CHECK(run_cli("simulate --config " + unknown.string() + " --mask 0000000000 --out " +
                  out.string()) == 1);
    const auto broken = tmp / "broken.cfg";
    write(broken, "{ \"episode\": ");
    CHECK(run_cli("simulate --config " + broken.string() + " --mask 0000000000 --out " +
                  out.string()) == 1);
    CHECK(run_cli("simulate --config " + kV5.string() +
                  " --mask 0000000000 --format xml --out " + out.string()) == 1);
    // runtime errors: unwritable destinations
    CHECK(run_cli("simulate --config " + kV5.string() + " --mask 0000000000 --out " +
                  (tmp / "missing" / "t.csv").string()) == 2);
    write(tmp / "file", "x");
    CHECK(run_cli("sweep --config " + kV5.string() + " --param model_acc --values 0.5 --k 0 " +
                  "--replications 2 --out " + (tmp / "file" / "dir").string()) == 2);
    CHECK_FALSE(fs::exists(out));
    CHECK(run_cli("--help") == 0);
}
