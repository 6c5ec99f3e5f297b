// End-to-end checks of the command-line tool: artifacts on disk, exit codes,
// and byte-level determinism. Takes the tool path as argv[1].

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

int g_failures = 0;
std::string g_tool;
fs::path g_work;

void check(bool ok, const std::string& what) {
  std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what.c_str());
  if (!ok) ++g_failures;
}

int run(const std::string& args) {
  const std::string cmd = g_tool + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WEXITSTATUS(raw);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

const char* kSmooth =
    "dim = 1\n"
    "n = 64\n"
    "ic.preset = cosine\n"
    "ic.amplitude = 1e-3\n"
    "t_final = 0.005\n"
    "n_steps = 25\n"
    "snapshot_stride = 10\n";

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: cli_e2e <path-to-tfe>\n");
    return 2;
  }
  g_tool = argv[1];
  g_work = fs::temp_directory_path() / "tfe_cli_e2e";
  fs::remove_all(g_work);
  fs::create_directories(g_work);

  const fs::path cfg = g_work / "run.cfg";
  write(cfg, kSmooth);

  // run: exit 0, artifacts present, trace has header + 26 rows
  {
    const fs::path out = g_work / "out_a";
    const int code = run("run --config " + cfg.string() + " --out " + out.string());
    check(code == 0, "run exits 0 on a smooth config");
    check(fs::exists(out / "trace.csv"), "trace.csv written");
    check(fs::exists(out / "summary.json"), "summary.json written");
    check(fs::exists(out / "snapshot_0.csv") && fs::exists(out / "snapshot_20.csv") &&
              fs::exists(out / "snapshot_25.csv"),
          "snapshots at the stride and the final step");

    const std::string trace = slurp(out / "trace.csv");
    check(trace.rfind("step,time,phi,phi_raw,free_energy_F,", 0) == 0,
          "trace.csv header starts with the fixed column order");
    size_t rows = 0;
    for (char c : trace)
      if (c == '\n') ++rows;
    check(rows == 27, "trace.csv has header + n_steps + 1 rows");

    auto j = nlohmann::json::parse(slurp(out / "summary.json"));
    check(j["version"].is_string() && j.contains("wall_clock_s"),
          "summary has version and wall clock");
    bool all_passed = true;
    for (const auto& c : j["checks"])
      all_passed = all_passed && (c["passed"].get<bool>() || !c["enforced"].get<bool>());
    check(all_passed, "summary checks all passed");
    check(j["config"]["n"].get<int>() == 64, "summary echoes the config");
  }

  // determinism: identical config => byte-identical trace.csv and
  // wall-clock-stripped summary.json
  {
    const fs::path out_b = g_work / "out_b";
    const fs::path out_c = g_work / "out_c";
    run("run --config " + cfg.string() + " --out " + out_b.string());
    run("run --config " + cfg.string() + " --out " + out_c.string());
    check(slurp(out_b / "trace.csv") == slurp(out_c / "trace.csv"),
          "identical configs produce byte-identical traces");
    check(slurp(out_b / "snapshot_25.csv") == slurp(out_c / "snapshot_25.csv"),
          "identical configs produce byte-identical snapshots");
    auto jb = nlohmann::json::parse(slurp(out_b / "summary.json"));
    auto jc = nlohmann::json::parse(slurp(out_c / "summary.json"));
    jb.erase("wall_clock_s");
    jc.erase("wall_clock_s");
    check(jb == jc, "summaries identical apart from wall clock");
  }

  // seeded override changes the data deterministically
  {
    const fs::path rcfg = g_work / "rand.cfg";
    write(rcfg,
          "dim = 1\nn = 64\nic.preset = random_bandlimited\nic.amplitude = 1e-3\n"
          "t_final = 0.002\nn_steps = 10\n");
    const fs::path o1 = g_work / "seed_1";
    const fs::path o2 = g_work / "seed_2";
    const fs::path o3 = g_work / "seed_3";
    run("run --config " + rcfg.string() + " --out " + o1.string() + " --seed 5");
    run("run --config " + rcfg.string() + " --out " + o2.string() + " --seed 5");
    run("run --config " + rcfg.string() + " --out " + o3.string() + " --seed 6");
    check(slurp(o1 / "trace.csv") == slurp(o2 / "trace.csv"),
          "same seed, same bytes");
    check(slurp(o1 / "trace.csv") != slurp(o3 / "trace.csv"),
          "different seed, different trajectory");
  }

  // verify on flat data: exit 0 and (near) zero violations
  {
    const fs::path fcfg = g_work / "flat.cfg";
    write(fcfg,
          "dim = 1\nn = 32\nic.preset = cosine\nic.amplitude = 0\n"
          "t_final = 0.01\nn_steps = 5\n");
    const fs::path out = g_work / "out_flat";
    const int code = run("verify --config " + fcfg.string() + " --out " + out.string());
    check(code == 0, "verify exits 0 on flat initial data");
    check(fs::exists(out / "singularity.csv"), "verify writes the singularity series");
  }

  // corrupted-trace self test must fail the battery: exit 3
  {
    const fs::path out = g_work / "out_corrupt";
    const int code = run("run --config " + cfg.string() + " --out " + out.string() +
                         " --self-test-corrupt");
    check(code == 3, "self-test corruption exits 3");
  }

  // config errors: exit 1
  {
    const fs::path bad = g_work / "bad.cfg";
    write(bad, "dim = 1\nn = 3\nic.preset = cosine\nt_final = 0.01\nn_steps = 5\n");
    check(run("run --config " + bad.string()) == 1, "config error exits 1");
    check(run("run --config " + (g_work / "missing.cfg").string()) == 1,
          "missing config exits 1");
  }

  // solver nonconvergence: exit 2
  {
    const fs::path hard = g_work / "hard.cfg";
    write(hard,
          "dim = 1\nn = 64\nic.preset = random_bandlimited\nic.amplitude = 5e-3\n"
          "ic.max_mode = 4\nt_final = 5.0\nn_steps = 10\nmax_newton = 1\n");
    const fs::path out = g_work / "out_hard";
    check(run("run --config " + hard.string() + " --out " + out.string()) == 2,
          "newton budget exhaustion exits 2");
  }

  // convergence: table written, exit 0
  {
    const fs::path ccfg = g_work / "conv.cfg";
    write(ccfg,
          "dim = 1\nn = 64\nic.preset = cosine\nic.amplitude = 1e-3\n"
          "t_final = 0.01\nn_steps = 8\nconvergence.steps = 8,16,32\n");
    const fs::path out = g_work / "out_conv";
    const int code = run("convergence --config " + ccfg.string() + " --out " + out.string());
    check(code == 0, "convergence exits 0");
    const std::string table = slurp(out / "convergence.csv");
    check(table.rfind("n_steps,tau,error,bound_rhs,observed_order\n", 0) == 0,
          "convergence.csv header");
    size_t rows = 0;
    for (char c : table)
      if (c == '\n') ++rows;
    check(rows == 4, "convergence.csv has one row per step count");
  }

  // sweep: member directories and aggregate
  {
    const fs::path scfg = g_work / "sweep.cfg";
    write(scfg, std::string(kSmooth) + "sweep.axis = n_steps\nsweep.values = 10,20\n");
    const fs::path out = g_work / "out_sweep";
    const int code = run("sweep --config " + scfg.string() + " --out " + out.string() +
                         " --threads 2");
    check(code == 0, "sweep exits 0");
    check(fs::exists(out / "sweep.csv"), "sweep aggregate written");
    check(fs::exists(out / "n_steps_00" / "trace.csv") &&
              fs::exists(out / "n_steps_01" / "trace.csv"),
          "sweep member artifacts written");
  }

  std::printf("cli_e2e: %d failure(s)\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
