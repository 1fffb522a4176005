#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot read " << path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path log =
      fs::temp_directory_path() /
      ("vaporsim_cli_log_" + std::to_string(::getpid()) + "_" +
       std::to_string(counter++) + ".txt");
  const std::string cmd = std::string("\"") + VAPORSIM_CLI_PATH + "\" " +
                          args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  if (status >= 0 && WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  r.output = slurp(log);
  fs::remove(log);
  return r;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() /
           ("vaporsim_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

struct Csv {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, std::string> meta;
};

Csv parse_csv(const fs::path& path) {
  Csv csv;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto colon = line.find(':');
      REQUIRE(colon != std::string::npos);
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      while (!key.empty() && key.front() == ' ') key.erase(key.begin());
      while (!key.empty() && key.back() == ' ') key.pop_back();
      while (!value.empty() && value.front() == ' ') value.erase(value.begin());
      if (key == "columns") {
        std::istringstream cols(value);
        std::string col;
        while (std::getline(cols, col, ',')) csv.columns.push_back(col);
      } else {
        csv.meta[key] = value;
      }
      continue;
    }
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(std::stod(cell));
    REQUIRE(row.size() == csv.columns.size());
    csv.rows.push_back(std::move(row));
  }
  return csv;
}

std::vector<double> column(const Csv& csv, const std::string& name) {
  for (std::size_t i = 0; i < csv.columns.size(); ++i) {
    if (csv.columns[i] == name) {
      std::vector<double> out;
      for (const auto& row : csv.rows) out.push_back(row[i]);
      return out;
    }
  }
  REQUIRE_MESSAGE(false, "missing column " << name);
  return {};
}

// Relative file name -> bytes for every regular file under a directory.
std::map<std::string, std::string> dir_bytes(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    out[fs::relative(entry.path(), root).string()] = slurp(entry.path());
  }
  return out;
}

}  // namespace

TEST_CASE("help exits zero and lists the subcommands") {
  const RunResult r = run_cli("--help");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("pumping-curve") != std::string::npos);
  CHECK(r.output.find("memory-sweep") != std::string::npos);
  CHECK(r.output.find("synth") != std::string::npos);
  CHECK(r.output.find("fit") != std::string::npos);
  CHECK(r.output.find("rerun") != std::string::npos);
}

TEST_CASE("a bare invocation without a subcommand fails") {
  const RunResult r = run_cli("");
  CHECK(r.exit_code == 2);
}

TEST_CASE("pumping curve run from a config file writes CSV and manifest") {
  TempDir dir("pump");
  {
    std::ofstream cfg(dir.path / "run.kv");
    cfg << "buffers = N2:10\n"
        << "lines = D1\n"
        << "t_min_k = 333.15\n"
        << "t_max_k = 363.15\n"
        << "t_steps = 3\n"
        << "seed = 5\n";
  }
  const RunResult r =
      run_cli("pumping-curve --config " + q(dir.path / "run.kv") +
              " --output-dir " + q(dir.path / "out"));
  CHECK(r.exit_code == 0);

  const Csv csv = parse_csv(dir.path / "out" / "pumping_N2_10_D1.csv");
  CHECK(csv.columns == std::vector<std::string>{"T_K", "P", "M", "q"});
  REQUIRE(csv.rows.size() == 3);
  const auto temps = column(csv, "T_K");
  const auto pol = column(csv, "P");
  CHECK(temps.front() == doctest::Approx(333.15));
  CHECK(temps.back() == doctest::Approx(363.15));
  for (const double p : pol) CHECK(p > 0.99);

  const json manifest = json::parse(slurp(dir.path / "out" / "manifest.json"));
  CHECK(manifest.at("subcommand") == "pumping-curve");
  CHECK(manifest.at("seed") == 5);
  CHECK(manifest.at("config").at("t_steps") == "3");
  CHECK(manifest.at("config_hash").get<std::string>().size() == 16);
  CHECK(manifest.at("outputs").size() == 1);
}

TEST_CASE("unknown config keys are rejected naming the key") {
  const RunResult r = run_cli("pumping-curve --set not_a_key=1");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("not_a_key") != std::string::npos);
}

TEST_CASE("command line overrides beat config file values") {
  TempDir dir("override");
  {
    std::ofstream cfg(dir.path / "run.kv");
    cfg << "kind = spectrum\nnoise_sigma = 0.5\npoints = 301\nseed = 1\n";
  }
  const RunResult r =
      run_cli("synth --config " + q(dir.path / "run.kv") +
              " --set noise_sigma=0 --seed 9 --output-dir " +
              q(dir.path / "out"));
  CHECK(r.exit_code == 0);
  const json manifest = json::parse(slurp(dir.path / "out" / "manifest.json"));
  CHECK(manifest.at("config").at("noise_sigma") == "0");
  CHECK(manifest.at("config").at("seed") == "9");
  CHECK(manifest.at("truth").at("noise_sigma") == 0.0);
}

TEST_CASE("nitrogen keeps a higher polarization than neon at hot settings") {
  TempDir dir("order");
  const RunResult r = run_cli(
      "pumping-curve --set buffers=N2:10,Ne:20 --set lines=D1"
      " --set t_min_k=348.15 --set t_max_k=413.15 --set t_steps=4"
      " --output-dir " +
      q(dir.path / "out"));
  CHECK(r.exit_code == 0);
  const auto p_n2 =
      column(parse_csv(dir.path / "out" / "pumping_N2_10_D1.csv"), "P");
  const auto p_ne =
      column(parse_csv(dir.path / "out" / "pumping_Ne_20_D1.csv"), "P");
  REQUIRE(p_n2.size() == p_ne.size());
  for (std::size_t i = 0; i < p_n2.size(); ++i) CHECK(p_n2[i] >= p_ne[i]);
}

TEST_CASE("memory sweep with four-wave mixing off stays below unit gain") {
  TempDir dir("sweep");
  const RunResult r = run_cli(
      "memory-sweep --set fwm_on=false --set stark_on=false"
      " --set omega_min_ghz=1 --set omega_max_ghz=8 --set omega_steps=8"
      " --output-dir " +
      q(dir.path / "out"));
  CHECK(r.exit_code == 0);
  const Csv csv = parse_csv(dir.path / "out" / "memory_sweep_d15p2.csv");
  const std::vector<std::string> expected = {
      "omega_GHz", "delta_GHz",          "T_K",
      "d",         "eta",                "eta_readin",
      "anti_stokes_energy", "converged_flag"};
  CHECK(csv.columns == expected);
  REQUIRE(csv.rows.size() == 8);
  const auto omegas = column(csv, "omega_GHz");
  const auto etas = column(csv, "eta");
  for (const double eta : etas) {
    CHECK(eta >= 0.0);
    CHECK(eta <= 1.0 + 1e-6);
  }
  for (const double flag : column(csv, "converged_flag")) CHECK(flag == 1.0);
  // The coupling calibration anchor, reproduced through the full CLI path.
  REQUIRE(omegas[3] == doctest::Approx(4.0));
  CHECK(etas[3] == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("the resolution flag reports unresolved rows instead of hiding them") {
  TempDir dir("flags");
  const RunResult r = run_cli(
      "memory-sweep --set fwm_on=false --set omega_min_ghz=1"
      " --set omega_max_ghz=8 --set omega_steps=8 --output-dir " +
      q(dir.path / "out"));
  CHECK(r.exit_code == 0);
  const Csv csv = parse_csv(dir.path / "out" / "memory_sweep_d15p2.csv");
  for (const double eta : column(csv, "eta")) CHECK(eta <= 1.0 + 1e-6);
  for (const double flag : column(csv, "converged_flag"))
    CHECK((flag == 0.0 || flag == 1.0));
}

TEST_CASE("a seeded synthesis rerun from the manifest is byte-identical") {
  TempDir dir("rerun");
  const std::string synth_args =
      "synth --set kind=spectrum --set points=601 --seed 123 --output-dir ";
  CHECK(run_cli(synth_args + q(dir.path / "a")).exit_code == 0);
  const RunResult r =
      run_cli("rerun --manifest " + q(dir.path / "a" / "manifest.json") +
              " --output-dir " + q(dir.path / "b"));
  CHECK(r.exit_code == 0);
  const auto a = dir_bytes(dir.path / "a");
  const auto b = dir_bytes(dir.path / "b");
  REQUIRE(a.size() == b.size());
  for (const auto& [name, bytes] : a) {
    REQUIRE(b.count(name) == 1);
    CHECK_MESSAGE(b.at(name) == bytes, name << " differs after rerun");
  }
}

TEST_CASE("spectrum synthesis and fitting round-trip through files") {
  TempDir dir("spec");
  const RunResult synth = run_cli(
      "synth --set kind=spectrum --set optical_depth=5"
      " --set polarization=0.97 --seed 42 --output-dir " +
      q(dir.path / "a"));
  CHECK(synth.exit_code == 0);
  const RunResult fit =
      run_cli("fit --set input=" + q(dir.path / "a" / "trace.txt") +
              " --output-dir " + q(dir.path / "b"));
  CHECK(fit.exit_code == 0);

  const json truth =
      json::parse(slurp(dir.path / "a" / "manifest.json")).at("truth");
  const json result = json::parse(slurp(dir.path / "b" / "fit_spectrum.json"));
  CHECK(result.at("polarization").get<double>() ==
        doctest::Approx(truth.at("polarization").get<double>())
            .epsilon(2e-3 / 0.97));
  CHECK(result.at("optical_depth").get<double>() ==
        doctest::Approx(truth.at("optical_depth").get<double>()).epsilon(0.02));
  CHECK(result.at("temperature_k").get<double>() ==
        doctest::Approx(truth.at("temperature_k").get<double>()).epsilon(0.03));
  CHECK(result.at("at_bound") == false);
  CHECK(result.at("covariance").size() == 5);
}

TEST_CASE("image series synthesis and diffusion fitting round-trip") {
  TempDir dir("diff");
  const RunResult synth = run_cli(
      "synth --set kind=image_series --seed 9 --output-dir " +
      q(dir.path / "a"));
  CHECK(synth.exit_code == 0);
  CHECK(fs::exists(dir.path / "a" / "series" / "series.json"));
  const RunResult fit =
      run_cli("fit --set input=" + q(dir.path / "a" / "series") +
              " --output-dir " + q(dir.path / "b"));
  CHECK(fit.exit_code == 0);

  const json truth =
      json::parse(slurp(dir.path / "a" / "manifest.json")).at("truth");
  const json result =
      json::parse(slurp(dir.path / "b" / "fit_diffusion.json"));
  const double d_true = truth.at("d_cm2_per_s").get<double>();
  const double d_fit = result.at("d_cm2_per_s").get<double>();
  CHECK(d_fit == doctest::Approx(d_true).epsilon(0.05));
  CHECK(result.at("gamma0_per_ms").get<double>() ==
        doctest::Approx(truth.at("gamma0_per_ms").get<double>())
            .epsilon(0.10));
  CHECK(result.at("d_lo_cm2_per_s").get<double>() < d_fit);
  CHECK(result.at("d_hi_cm2_per_s").get<double>() > d_fit);
  CHECK(result.at("modes").size() >= 5);
}

TEST_CASE("missing and empty fit inputs exit with the configuration code") {
  TempDir dir("badinput");
  const RunResult missing =
      run_cli("fit --set input=" + q(dir.path / "nope.txt"));
  CHECK(missing.exit_code == 2);
  CHECK(missing.output.find("nope.txt") != std::string::npos);

  { std::ofstream empty(dir.path / "empty.txt"); }
  const RunResult blank =
      run_cli("fit --set input=" + q(dir.path / "empty.txt"));
  CHECK(blank.exit_code == 2);

  const RunResult unset = run_cli("fit");
  CHECK(unset.exit_code == 2);
  CHECK(unset.output.find("input") != std::string::npos);
}

TEST_CASE("a scan the model cannot represent exits with the numeric code") {
  TempDir dir("numeric");
  {
    std::ofstream trace(dir.path / "patho.txt");
    for (int i = 0; i <= 100; ++i) {
      const double f = -8.0 + 16.0 * i / 100.0;
      trace << f << " " << (i % 2 ? 0.001 : 2.0) << "\n";
    }
  }
  const RunResult r = run_cli("fit --set input=" + q(dir.path / "patho.txt"));
  CHECK(r.exit_code == 3);
  CHECK(r.output.find("did not converge") != std::string::npos);
}

TEST_CASE("a corrupt manifest is rejected as a configuration error") {
  TempDir dir("manifest");
  std::ofstream(dir.path / "manifest.json") << "{not json";
  const RunResult r =
      run_cli("rerun --manifest " + q(dir.path / "manifest.json"));
  CHECK(r.exit_code == 2);
}
