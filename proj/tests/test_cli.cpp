#include "dissolve/cli.hpp"
#include "dissolve/ingest.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace dissolve;
namespace fs = std::filesystem;

namespace {

struct Captured {
  int code = -1;
  std::string out;
  std::string err;
};

Captured run(std::vector<std::string> args) {
  args.insert(args.begin(), "dissolve");
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  Captured c;
  c.code = run_cli(args);
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  c.out = out.str();
  c.err = err.str();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// Tiny network grid so sweeps finish quickly.
const char* kQuickConfig =
    "[split]\ntest_count = 8\n"
    "[mlp]\nhidden_grid = 8\nalpha_grid = 0.001\nmax_iter = 60\n";

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"sweep", "--help"}).code == 0);
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"generate", "--preset", "huge"}).code == 1);
}

TEST_CASE("generate presets") {
  testutil::TempDir dir("cli_gen");
  const Captured c = run({"generate", "--preset", "test", "--seed", "3", "-o", (dir.path / "t").string()});
  CHECK(c.code == 0);
  CHECK(c.out.find("fingerprint") != std::string::npos);
  CHECK(load_dataset(dir.path / "t").n_samples() == 40);

  CHECK(run({"generate", "--preset", "paper", "--seed", "7", "-o", (dir.path / "p").string()}).code == 0);
  const std::string manifest = slurp(dir.path / "p" / "manifest.txt");
  CHECK(manifest.find("n_samples=296") != std::string::npos);
}

TEST_CASE("config errors name the key") {
  testutil::TempDir dir("cli_cfg");
  spit(dir.path / "bad.cfg", "[generator]\nn_settings = 5\nwavelength_count = 3\n");
  const Captured c = run({"generate", "--config", (dir.path / "bad.cfg").string(), "-o", dir.path.string()});
  CHECK(c.code == 1);
  CHECK(c.err.find("wavelength_count") != std::string::npos);

  spit(dir.path / "bad2.cfg", "[mlp]\nlearning_rate = 0.1\n");
  const Captured c2 = run({"sweep", "--config", (dir.path / "bad2.cfg").string(), dir.path.string()});
  CHECK(c2.code == 1);
  CHECK(c2.err.find("learning_rate") != std::string::npos);

  CHECK(run({"generate", "--config", (dir.path / "missing.cfg").string()}).code == 1);
}

TEST_CASE("config preset and generator keys") {
  testutil::TempDir dir("cli_cfg2");
  spit(dir.path / "gen.cfg", "[generator]\npreset = test\nn_settings = 2\n");
  CHECK(run({"generate", "--config", (dir.path / "gen.cfg").string(), "-o", dir.path.string()}).code == 0);
  CHECK(load_dataset(dir.path).n_samples() == 16);
}

TEST_CASE("validate and data errors") {
  testutil::TempDir dir("cli_val");
  CHECK(run({"validate", (dir.path / "nope").string()}).code == 2);
  CHECK(run({"pca", "--channel", "nir_tr", (dir.path / "nope").string()}).code == 2);
  REQUIRE(run({"generate", "--preset", "test", "-o", dir.path.string()}).code == 0);
  CHECK(run({"validate", dir.path.string()}).code == 0);

  // Push one profile value out of range -> reported, exit 2.
  const fs::path prof = dir.path / "profiles.csv";
  std::string text = slurp(prof);
  const auto line2 = text.find('\n') + 1;
  const auto c1 = text.find(',', line2);
  const auto c2 = text.find(',', c1 + 1);
  text.replace(c1 + 1, c2 - c1 - 1, "250");
  spit(prof, text);
  const Captured c = run({"validate", dir.path.string()});
  CHECK(c.code == 2);
  CHECK(c.out.find("violation") != std::string::npos);
}

TEST_CASE("pca command") {
  testutil::TempDir dir("cli_pca");
  REQUIRE(run({"generate", "--preset", "small", "-o", dir.path.string()}).code == 0);
  const Captured c = run({"pca", "--channel", "raman_tr", "-o", dir.path.string(), "--dump-model", dir.path.string()});
  CHECK(c.code == 0);
  std::istringstream csv(slurp(dir.path / "variance_raman_tr.csv"));
  std::string header, first;
  std::getline(csv, header);
  std::getline(csv, first);
  const double ratio = std::stod(first.substr(first.find(',') + 1));
  CHECK(ratio > 0.99);
  CHECK(fs::exists(dir.path / "pca_raman_tr.csv"));

  const Captured m = run({"pca", "--merged", "--threshold", "0.99", "-o", dir.path.string(), dir.path.string()});
  CHECK(m.code == 0);
  CHECK(m.out.find("retained") != std::string::npos);
  CHECK(fs::exists(dir.path / "variance_merged.csv"));

  CHECK(run({"pca", dir.path.string()}).code == 1);
  CHECK(run({"pca", "--channel", "uv", dir.path.string()}).code == 1);
}

TEST_CASE("sweep, determinism and report") {
  testutil::TempDir dir("cli_sweep");
  const std::string data = (dir.path / "data").string();
  spit(dir.path / "quick.cfg", kQuickConfig);
  const std::string cfg = (dir.path / "quick.cfg").string();
  REQUIRE(run({"generate", "--preset", "test", "--seed", "7", "-o", data}).code == 0);

  CHECK(run({"sweep", "--max-size", "6", "--config", cfg, data}).code == 1);

  const std::string a = (dir.path / "a").string(), b = (dir.path / "b").string();
  const Captured ra = run({"sweep", "--max-size", "1", "--seed", "7", "--config", cfg, "-o", a, data});
  REQUIRE(ra.code == 0);
  CHECK(ra.out.find("top:") != std::string::npos);
  REQUIRE(run({"sweep", "--max-size", "1", "--seed", "7", "--jobs", "3", "--config", cfg, "-o", b, data}).code == 0);
  const std::string csv_a = slurp(fs::path(a) / "sweep_report.csv");
  CHECK(csv_a == slurp(fs::path(b) / "sweep_report.csv"));
  CHECK(csv_a.find("# dataset_fingerprint=") == 0);
  CHECK(csv_a.find("# mlp.hidden_grid=8") != std::string::npos);
  std::size_t lines = 0;
  for (char ch : csv_a) lines += ch == '\n';
  CHECK(lines == 13 + 1 + 5);  // provenance header, column header, rows
  CHECK(fs::exists(fs::path(a) / "sweep_report.md"));

  const Captured rep = run({"report", (fs::path(a) / "sweep_report.csv").string()});
  CHECK(rep.code == 0);
  CHECK(rep.out == slurp(fs::path(a) / "sweep_report.md"));
  CHECK(run({"report", (dir.path / "none.csv").string()}).code == 2);
}

TEST_CASE("train writes a model") {
  testutil::TempDir dir("cli_train");
  const std::string data = (dir.path / "data").string();
  REQUIRE(run({"generate", "--preset", "test", "-o", data}).code == 0);
  const Captured c = run({"train", "--channels", "nir_tr,compression", "--test-count", "8", "--hidden", "6",
                          "--alpha", "0.001", "-o", dir.path.string(), data});
  CHECK(c.code == 0);
  CHECK(c.out.find("mean f2") != std::string::npos);
  CHECK(fs::exists(dir.path / "mlp_nir_tr-compression.csv"));
  CHECK(run({"train", "--channels", "nir_tr", "--test-count", "40", data}).code == 1);
  CHECK(run({"train", "--channels", "laser", data}).code == 1);
}
