// End-to-end acceptance checks; prints one PASS/FAIL line per criterion.
#include "dissolve/cli.hpp"
#include "dissolve/experiment.hpp"
#include "dissolve/ingest.hpp"
#include "dissolve/mlp.hpp"
#include "dissolve/pca.hpp"
#include "dissolve/preprocess.hpp"
#include "dissolve/similarity.hpp"
#include "dissolve/synthdata.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace dissolve;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool ok, double seconds, const std::string& detail) {
  std::printf("criterion %2d: %s  (%.2f s)  %s\n", id, ok ? "PASS" : "FAIL", seconds, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename F>
void run_criterion(int id, double budget_s, F&& body) {
  const auto t0 = Clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double s = std::chrono::duration<double>(Clock::now() - t0).count();
  if (s > budget_s) {
    ok = false;
    detail += " [over time budget of " + std::to_string(static_cast<int>(budget_s)) + " s]";
  }
  report(id, ok, s, detail);
}

Matrix random_matrix(Index r, Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = nd(rng);
  return m;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dissolve");
  std::ostringstream sink;
  auto* old = std::cout.rdbuf(sink.rdbuf());
  const int code = run_cli(args);
  std::cout.rdbuf(old);
  return code;
}

bool same_bytes(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

// f2 of a uniform offset d, by hand.
double f2_closed_form(double d) { return 50.0 * std::log10(100.0 / std::sqrt(1.0 + d * d)); }

bool metric_values(std::string& detail) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    Vector r(53);
    for (Index i = 0; i < 53; ++i) r[i] = u(rng) + 1e-3;
    worst = std::max({worst, std::abs(f2(r, r) - 100.0), std::abs(f1(r, r))});
  }
  Vector r(53);
  for (Index i = 0; i < 53; ++i) r[i] = u(rng);
  const double o10 = f2(r, (r.array() + 10.0).matrix());
  const double o2 = f2(r, (r.array() + 2.0).matrix());
  detail = "identity err " + fmt("%.1e", worst) + "; offset 10 -> " + fmt("%.6f", o10) + " (closed form " +
           fmt("%.6f", f2_closed_form(10)) + "); offset 2 -> " + fmt("%.6f", o2) + " (closed form " +
           fmt("%.6f", f2_closed_form(2)) + ")";
  return worst <= 1e-9 && std::abs(o10 - f2_closed_form(10)) <= 1e-3 &&
         std::abs(o2 - f2_closed_form(2)) <= 1e-3 && std::abs(o2 - 82.5257) <= 1e-3;
}

bool pca_oracle(std::string& detail) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> rows(2, 20), cols(1, 10);
  double worst_eig = 0.0, worst_sum = 0.0, worst_rec = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Matrix X = random_matrix(rows(rng), cols(rng), rng, 2.0);
    const Index n = X.rows();
    const Vector mean = X.colwise().mean().transpose();
    Matrix sigma = Matrix::Zero(X.cols(), X.cols());
    for (Index i = 0; i < n; ++i) {
      const Vector d = X.row(i).transpose() - mean;
      sigma += d * d.transpose();
    }
    sigma /= static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
    const Vector oracle = es.eigenvalues().reverse();

    const auto m = pca_fit(X);
    const double scale = oracle[0];
    for (Index i = 0; i < oracle.size(); ++i) {
      const double got = i < m.eigenvalues.size() ? m.eigenvalues[i] : 0.0;
      worst_eig = std::max(worst_eig, std::abs(got - std::max(0.0, oracle[i])) / scale);
    }
    worst_sum = std::max(worst_sum, std::abs(explained_ratios(m).sum() - 1.0));
    worst_rec = std::max(worst_rec, (reconstruct(m, project(m, X)) - X).norm() / X.norm());
  }
  detail = "100 matrices; eigenvalue rel err " + fmt("%.1e", worst_eig) + ", ratio-sum err " + fmt("%.1e", worst_sum) +
           ", reconstruction rel err " + fmt("%.1e", worst_rec);
  return worst_eig <= 1e-8 && worst_sum <= 1e-9 && worst_rec <= 1e-8;
}

bool scaler_contract(std::string& detail) {
  std::mt19937_64 rng(3);
  double worst_mean = 0.0, worst_std = 0.0;
  bool constants_zero = true;
  for (int rep = 0; rep < 50; ++rep) {
    Matrix X = random_matrix(5 + rep, 12, rng, 1.0 + rep);
    X.col(3).setConstant(0.1 * rep + 4.2);
    X.col(7).array() += 1e4;
    const Matrix Z = scaler_transform(scaler_fit(X), X);
    for (Index j = 0; j < Z.cols(); ++j) {
      if (j == 3) {
        constants_zero = constants_zero && Z.col(j).isZero(0.0);
        continue;
      }
      const double mu = Z.col(j).mean();
      const double sd = std::sqrt((Z.col(j).array() - mu).square().mean());
      worst_mean = std::max(worst_mean, std::abs(mu));
      worst_std = std::max(worst_std, std::abs(sd - 1.0));
    }
  }
  detail = "|mean| " + fmt("%.1e", worst_mean) + ", |std-1| " + fmt("%.1e", worst_std) +
           (constants_zero ? ", constant columns -> 0" : ", constant column not zero");
  return worst_mean <= 1e-9 && worst_std <= 1e-9 && constants_zero;
}

bool gradient_check(std::string& detail) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> depth(1, 3), width(1, 16), dim(1, 6), rows(2, 10);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    MlpConfig cfg;
    cfg.hidden_layers.clear();
    for (int l = depth(rng); l > 0; --l) cfg.hidden_layers.push_back(width(rng));
    cfg.l2_alpha = rep % 3 == 0 ? 0.0 : 0.1 * rep;
    cfg.seed = 100 + rep;
    const Index in = dim(rng), out = dim(rng), n = rows(rng);
    MlpModel m = mlp_init(cfg, in, out);
    for (auto& b : m.biases) b = random_matrix(b.size(), 1, rng, 0.1);
    const Matrix X = random_matrix(n, in, rng), Y = random_matrix(n, out, rng);
    const Vector g = loss_and_grad(m, X, Y).grad;
    const Vector theta = pack_parameters(m);
    MlpModel probe = m;
    const double eps = 1e-6;
    for (Index k = 0; k < theta.size(); ++k) {
      Vector t = theta;
      t[k] += eps;
      unpack_parameters(probe, t);
      const double up = loss_and_grad(probe, X, Y).loss;
      t[k] -= 2 * eps;
      unpack_parameters(probe, t);
      const double down = loss_and_grad(probe, X, Y).loss;
      const double fd = (up - down) / (2 * eps);
      worst = std::max(worst, std::abs(g[k] - fd) / std::max({std::abs(g[k]), std::abs(fd), 1e-3}));
    }
  }
  detail = "20 networks; worst relative error " + fmt("%.2e", worst) + " (denominator floored at 1e-3)";
  return worst <= 1e-5;
}

bool capacity_check(std::string& detail) {
  std::mt19937_64 rng(5);
  const Matrix X = random_matrix(10, 5, rng), Y = random_matrix(10, 53, rng, 20.0);
  MlpConfig cfg;
  cfg.hidden_layers = {32};
  cfg.l2_alpha = 0.0;
  cfg.max_iter = 500;
  cfg.seed = 7;
  const MlpModel m = train(cfg, X, Y);
  const double err = mse(m, X, Y);
  detail = "train MSE " + fmt("%.2e", err) + " after " + std::to_string(m.n_iters) + " iterations";
  return err <= 1e-3 && m.n_iters <= 500;
}

struct SweepRun {
  fs::path csv;
  double seconds = 0.0;
  int code = -1;
};

bool determinism(const fs::path& root, const SweepRun& first, std::string& detail) {
  const fs::path out2 = root / "sweep_b";
  const int code = cli({"sweep", "--seed", "7", "--jobs", "2", "-o", out2.string(), (root / "data").string()});
  const std::string a = slurp(first.csv), b = slurp(out2 / "sweep_report.csv");
  detail = "two sweeps (--jobs 1 and --jobs 2), " + std::to_string(a.size()) + " bytes each";
  return first.code == 0 && code == 0 && !a.empty() && a == b;
}

bool qualitative(const SweepRun& run, std::string& detail) {
  if (run.code != 0) {
    detail = "sweep exited with " + std::to_string(run.code);
    return false;
  }
  const SweepReport rep = read_sweep_csv(run.csv);
  const SweepRow* best[4] = {nullptr, nullptr, nullptr, nullptr};
  for (const auto& r : rep.rows) {
    const std::size_t k = r.channels.size();
    if (k <= 3 && (!best[k] || r.mean_f2 > best[k]->mean_f2)) best[k] = &r;
  }
  if (!best[1] || !best[2] || !best[3]) {
    detail = "missing combination sizes";
    return false;
  }
  const bool a = best[1]->mean_f2 <= best[2]->mean_f2;
  bool informative = false;
  for (MeasurementKind k : best[2]->channels) {
    informative |= k == MeasurementKind::NirTransmission || k == MeasurementKind::CompressionForce;
  }
  const bool b = informative && best[2]->mean_f2 >= 60.0;
  const bool c = best[3]->mean_f2 >= best[2]->mean_f2 - 2.0;
  const bool t = run.seconds < 600.0;
  detail = "best single " + combination_label(best[1]->channels) + " " + fmt("%.2f", best[1]->mean_f2) +
           "; best pair " + combination_label(best[2]->channels) + " " + fmt("%.2f", best[2]->mean_f2) +
           "; best triple " + combination_label(best[3]->channels) + " " + fmt("%.2f", best[3]->mean_f2) +
           "; (a) " + (a ? "ok" : "no") + " (b) " + (b ? "ok" : "no") + " (c) " + (c ? "ok" : "no") +
           "; sweep " + fmt("%.0f", run.seconds) + " s";
  return a && b && c && t;
}

bool no_leakage(std::string& detail) {
  const Dataset ds = generate(preset_config(Preset::Small));
  SplitSpec spec;
  spec.seed = 8;
  const SplitIndices s = split(ds, spec);
  Dataset poisoned = ds;
  const Index victim = s.test[s.test.size() / 2];
  for (MeasurementKind k : kCanonicalOrder) poisoned.blocks.at(k).values.row(victim).array() += 1e6;
  bool same = true;
  for (MeasurementKind k : kCanonicalOrder) {
    const ChannelPipeline a = fit_channel(ds, k, s.train, 0.99);
    const ChannelPipeline b = fit_channel(poisoned, k, s.train, 0.99);
    same = same && same_bytes(a.scaler.means, b.scaler.means) && same_bytes(a.scaler.stds, b.scaler.stds) &&
           same_bytes(a.pca.mean, b.pca.mean) && same_bytes(a.pca.eigenvalues, b.pca.eigenvalues) &&
           same_bytes(a.pca.components, b.pca.components) && a.pca.retained == b.pca.retained;
  }
  detail = "outlier of 1e6 in test row " + std::to_string(victim) + "; fitted statistics " +
           (same ? "byte-identical" : "changed");
  return same;
}

bool table_shapes(const fs::path& root, const SweepRun& full, std::string& detail) {
  const fs::path data = root / "tiny";
  const fs::path cfg = root / "tiny.cfg";
  std::ofstream(cfg) << "[split]\ntest_count = 8\n[mlp]\nhidden_grid = 8\nalpha_grid = 0.001\nmax_iter = 60\n";
  if (cli({"generate", "--preset", "test", "--seed", "7", "-o", data.string()}) != 0) {
    detail = "generate failed";
    return false;
  }
  std::vector<std::size_t> counts;
  for (int size : {1, 2}) {
    const fs::path out = root / ("shape" + std::to_string(size));
    if (cli({"sweep", "--max-size", std::to_string(size), "--config", cfg.string(), "-o", out.string(),
             data.string()}) != 0) {
      detail = "sweep failed";
      return false;
    }
    counts.push_back(read_sweep_csv(out / "sweep_report.csv").rows.size());
  }
  counts.push_back(full.code == 0 ? read_sweep_csv(full.csv).rows.size() : 0);
  detail = "rows for --max-size 1/2/3: " + std::to_string(counts[0]) + "/" + std::to_string(counts[1]) + "/" +
           std::to_string(counts[2]);
  return counts[0] == 5 && counts[1] == 15 && counts[2] == 25;
}

bool round_trip(const fs::path& root, std::string& detail) {
  GeneratorConfig cfg = preset_config(Preset::Paper);
  cfg.seed = 10;
  const Dataset ds = generate(cfg);
  save_dataset(ds, root / "paper");
  const Dataset back = load_dataset(root / "paper");
  Index cells = ds.profiles.size();
  for (const auto& [k, b] : ds.blocks) cells += b.values.size();
  detail = std::to_string(ds.n_samples()) + " samples, " + std::to_string(cells) + " values; " +
           (back == ds ? "value-exact" : "mismatch");
  return ds.n_samples() == 296 && back == ds;
}

}  // namespace

int main() {
  std::error_code ec;
  const fs::path root = fs::temp_directory_path() / ("dissolve_acceptance_" + std::to_string(std::random_device{}()));
  fs::create_directories(root);

  run_criterion(1, 1.0, metric_values);
  run_criterion(2, 10.0, pca_oracle);
  run_criterion(3, 1.0, scaler_contract);
  run_criterion(4, 30.0, gradient_check);
  run_criterion(5, 10.0, capacity_check);

  // One full sweep on the default design (64-point grids) serves criteria 6, 7 and 9.
  SweepRun full;
  {
    const auto t0 = Clock::now();
    if (cli({"generate", "--preset", "small", "--seed", "7", "-o", (root / "data").string()}) == 0) {
      full.code = cli({"sweep", "--seed", "7", "--jobs", "1", "-o", (root / "sweep_a").string(), (root / "data").string()});
    }
    full.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    full.csv = root / "sweep_a" / "sweep_report.csv";
  }
  run_criterion(6, 1e9, [&](std::string& d) { return determinism(root, full, d); });
  run_criterion(7, 1e9, [&](std::string& d) { return qualitative(full, d); });
  run_criterion(8, 60.0, no_leakage);
  run_criterion(9, 120.0, [&](std::string& d) { return table_shapes(root, full, d); });
  run_criterion(10, 30.0, [&](std::string& d) { return round_trip(root, d); });

  fs::remove_all(root, ec);
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
