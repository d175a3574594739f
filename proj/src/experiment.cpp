#include "dissolve/experiment.hpp"

#include "dissolve/csv.hpp"
#include "dissolve/seeding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace dissolve {

namespace {

std::uint64_t channel_mask(const std::vector<MeasurementKind>& channels) {
  std::uint64_t mask = 0;
  for (MeasurementKind k : channels) mask |= std::uint64_t{1} << canonical_rank(k);
  return mask;
}

std::vector<MeasurementKind> canonical_sorted(std::vector<MeasurementKind> channels) {
  std::sort(channels.begin(), channels.end(), [](MeasurementKind a, MeasurementKind b) {
    return canonical_rank(a) < canonical_rank(b);
  });
  return channels;
}

Matrix gather_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Index>(r)) = m.row(rows[r]);
  return out;
}

std::string join_ints(const std::vector<int>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(v[i]);
  }
  return s;
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string_view to_string(Grouping g) {
  return g == Grouping::SampleLevel ? "sample" : "tablet";
}

std::optional<Grouping> parse_grouping(std::string_view name) {
  if (name == "sample") return Grouping::SampleLevel;
  if (name == "tablet") return Grouping::TabletLevel;
  return std::nullopt;
}

SplitIndices split(const Dataset& ds, const SplitSpec& spec) {
  const Index n = ds.n_samples();
  if (spec.test_count <= 0 || spec.test_count >= n) {
    throw BadSpec("test_count must lie in (0, " + std::to_string(n) + "), got " +
                  std::to_string(spec.test_count));
  }
  std::mt19937_64 rng(spec.seed);
  SplitIndices out;
  std::vector<char> is_test(static_cast<std::size_t>(n), 0);

  if (spec.grouping == Grouping::SampleLevel) {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (Index i = 0; i < spec.test_count; ++i) is_test[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
  } else {
    std::vector<std::int64_t> tablets;
    std::map<std::int64_t, std::vector<Index>> members;
    for (Index i = 0; i < n; ++i) {
      const auto t = ds.meta[static_cast<std::size_t>(i)].tablet_id;
      if (members.find(t) == members.end()) tablets.push_back(t);
      members[t].push_back(i);
    }
    std::shuffle(tablets.begin(), tablets.end(), rng);
    Index taken = 0;
    for (auto t : tablets) {
      if (taken >= spec.test_count) break;
      for (Index i : members[t]) is_test[static_cast<std::size_t>(i)] = 1;
      taken += static_cast<Index>(members[t].size());
    }
    if (taken >= n) throw BadSpec("tablet-level split leaves no training samples");
  }
  for (Index i = 0; i < n; ++i) (is_test[static_cast<std::size_t>(i)] ? out.test : out.train).push_back(i);
  return out;
}

void check_spec(const CombinationSpec& spec) {
  if (spec.channels.empty()) throw BadSpec("combination has no channels");
  for (std::size_t i = 0; i < spec.channels.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.channels.size(); ++j) {
      if (spec.channels[i] == spec.channels[j]) throw BadSpec("duplicate channel in combination");
    }
  }
  if (spec.target_offset < 0 || spec.target_offset >= kTimePoints) {
    throw BadSpec("target_offset must lie in [0, 53)");
  }
  if (!(spec.pca_threshold > 0.0 && spec.pca_threshold <= 1.0)) {
    throw BadSpec("pca_threshold must lie in (0, 1]");
  }
  if (spec.grid.hidden.empty() || spec.grid.l2_alpha.empty()) throw BadSpec("empty model grid");
}

std::vector<Index> complement(const std::vector<Index>& idx, Index n) {
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (Index i : idx) used[static_cast<std::size_t>(i)] = 1;
  std::vector<Index> out;
  for (Index i = 0; i < n; ++i) {
    if (!used[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

ChannelPipeline fit_channel(const Dataset& ds, MeasurementKind kind,
                            const std::vector<Index>& train_idx, double threshold) {
  const Matrix X = gather_rows(ds.block(kind).values, train_idx);
  ChannelPipeline p;
  p.kind = kind;
  p.scaler = scaler_fit(X);
  p.pca = pca_fit(scaler_transform(p.scaler, X));
  select_components(p.pca, threshold);
  return p;
}

Matrix apply_channel(const ChannelPipeline& p, const Dataset& ds, const std::vector<Index>& rows) {
  const Matrix X = gather_rows(ds.block(p.kind).values, rows);
  return project(p.pca, scaler_transform(p.scaler, X));
}

FeatureSet build_features(const Dataset& ds, const std::vector<Index>& train_idx,
                          const CombinationSpec& spec) {
  check_spec(spec);
  const std::vector<Index> test_idx = complement(train_idx, ds.n_samples());
  FeatureSet fs;
  std::vector<Matrix> train_blocks, test_blocks;
  for (MeasurementKind kind : canonical_sorted(spec.channels)) {
    ChannelPipeline p = fit_channel(ds, kind, train_idx, spec.pca_threshold);
    train_blocks.push_back(apply_channel(p, ds, train_idx));
    test_blocks.push_back(apply_channel(p, ds, test_idx));
    for (Index c = 0; c < p.pca.retained; ++c) fs.feature_map.push_back({kind, c});
    fs.pipelines.push_back(std::move(p));
  }
  fs.train = concat_rows<double>(train_blocks);
  fs.test = concat_rows<double>(test_blocks);
  return fs;
}

std::string combination_label(const std::vector<MeasurementKind>& channels) {
  std::string s;
  for (MeasurementKind k : canonical_sorted(channels)) {
    if (!s.empty()) s += " + ";
    s += display_name(k);
  }
  return s;
}

CombinationResult run_combination(const Dataset& ds, const SplitSpec& split_spec,
                                  const CombinationSpec& spec, int repeats) {
  check_spec(spec);
  if (repeats < 1) throw BadSpec("repeats must be >= 1");
  const Index n_targets = kTimePoints - spec.target_offset;

  CombinationResult result;
  std::vector<double> f2_values, f1_values;
  double loss_sum = 0.0;
  long iter_sum = 0;

  for (int rep = 0; rep < repeats; ++rep) {
    SplitSpec s = split_spec;
    if (repeats > 1) s.seed = derive_seed(split_spec.seed, {0x5eed, static_cast<std::uint64_t>(rep)});
    const SplitIndices idx = split(ds, s);
    FeatureSet fs = build_features(ds, idx.train, spec);

    const Matrix profiles_train = gather_rows(ds.profiles, idx.train);
    const Matrix profiles_test = gather_rows(ds.profiles, idx.test);
    Matrix X_train = fs.train, X_test = fs.test;
    if (spec.target_offset > 0) {
      // Early measured points become inputs, standardized on train rows.
      const Matrix head_train = profiles_train.leftCols(spec.target_offset);
      const auto head_scaler = scaler_fit(head_train);
      const Matrix a = scaler_transform(head_scaler, head_train);
      const Matrix b = scaler_transform(head_scaler, profiles_test.leftCols(spec.target_offset));
      X_train.conservativeResize(Eigen::NoChange, X_train.cols() + a.cols());
      X_train.rightCols(a.cols()) = a;
      X_test.conservativeResize(Eigen::NoChange, X_test.cols() + b.cols());
      X_test.rightCols(b.cols()) = b;
    }
    const Matrix Y_train = profiles_train.rightCols(n_targets);
    const Matrix Y_test = profiles_test.rightCols(n_targets);

    // Model selection on training error over the declared grid.
    MlpModel best;
    double best_mse = std::numeric_limits<double>::infinity();
    std::uint64_t candidate = 0;
    for (const auto& hidden : spec.grid.hidden) {
      for (double alpha : spec.grid.l2_alpha) {
        MlpConfig cfg = spec.mlp;
        cfg.hidden_layers = hidden;
        cfg.l2_alpha = alpha;
        cfg.seed = derive_seed(spec.mlp.seed, {static_cast<std::uint64_t>(rep), candidate++});
        MlpModel m = train(cfg, X_train, Y_train);
        const double train_mse = mse(m, X_train, Y_train);
        if (train_mse < best_mse) {
          best_mse = train_mse;
          best = std::move(m);
        }
      }
    }

    const Matrix pred = predict(best, X_test);
    for (Index i = 0; i < pred.rows(); ++i) {
      const Vector ref = Y_test.row(i).transpose();
      const Vector est = pred.row(i).transpose();
      f2_values.push_back(f2(ref, est));
      f1_values.push_back(f1(ref, est));
    }
    loss_sum += best.train_loss;
    iter_sum += best.n_iters;

    SweepRow& row = result.row;
    row.channels = canonical_sorted(spec.channels);
    row.retained.clear();
    for (const auto& p : fs.pipelines) row.retained.push_back(p.pca.retained);
    row.hidden = best.config.hidden_layers;
    row.l2_alpha = best.config.l2_alpha;
    row.n_targets = n_targets;
    result.test_predictions = pred;
    result.test_targets = Y_test;
    result.model = std::move(best);
  }

  SweepRow& row = result.row;
  const MeanStd f2s = mean_std(Eigen::Map<const Vector>(f2_values.data(), static_cast<Index>(f2_values.size())));
  row.mean_f2 = f2s.mean;
  row.std_f2 = f2s.std;
  row.mean_f1 = std::accumulate(f1_values.begin(), f1_values.end(), 0.0) / static_cast<double>(f1_values.size());
  row.train_loss = loss_sum / repeats;
  row.n_iters = static_cast<int>(iter_sum / repeats);
  row.equivalent = equivalent(row.mean_f1, row.mean_f2);
  row.n_test = static_cast<Index>(f2_values.size());
  return result;
}

std::vector<std::vector<MeasurementKind>> enumerate_combinations(int max_size) {
  if (max_size < 1 || max_size > kNumKinds) {
    throw BadSpec("max_size must lie in [1, 5], got " + std::to_string(max_size));
  }
  std::vector<std::vector<MeasurementKind>> out;
  for (int size = 1; size <= max_size; ++size) {
    // Lexicographic subsets of canonical positions.
    std::vector<int> pos(static_cast<std::size_t>(size));
    std::iota(pos.begin(), pos.end(), 0);
    while (true) {
      std::vector<MeasurementKind> combo;
      for (int p : pos) combo.push_back(kCanonicalOrder[static_cast<std::size_t>(p)]);
      out.push_back(std::move(combo));
      int i = size - 1;
      while (i >= 0 && pos[static_cast<std::size_t>(i)] == kNumKinds - size + i) --i;
      if (i < 0) break;
      ++pos[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < size; ++j) pos[static_cast<std::size_t>(j)] = pos[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

SweepReport sweep(const Dataset& ds, const SplitSpec& split_spec, const CombinationSpec& base,
                  int max_size, int jobs, int repeats) {
  const auto combos = enumerate_combinations(max_size);
  std::vector<SweepRow> rows(combos.size());
  std::vector<std::exception_ptr> errors(combos.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t i = next++; i < combos.size(); i = next++) {
      try {
        CombinationSpec spec = base;
        spec.channels = combos[i];
        spec.mlp.seed = derive_seed(split_spec.seed, {0xc0b0, channel_mask(combos[i])});
        rows[i] = run_combination(ds, split_spec, spec, repeats).row;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(combos.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  // Enumeration order is canonical, so a stable sort breaks ties by it.
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.mean_f2 > b.mean_f2; });

  SweepReport report;
  report.rows = std::move(rows);
  report.seed = split_spec.seed;
  report.fingerprint = fingerprint(ds);
  return report;
}

namespace {

constexpr const char* kCsvHeader =
    "rank,channels,n_channels,retained,mean_f2,std_f2,mean_f1,train_loss,n_iters,equivalent,"
    "hidden,l2_alpha,n_test,n_targets";

std::string channel_ids(const std::vector<MeasurementKind>& channels) {
  std::string s;
  for (MeasurementKind k : channels) {
    if (!s.empty()) s += '+';
    s += short_name(k);
  }
  return s;
}

}  // namespace

void write_sweep_csv(const SweepReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# dataset_fingerprint=" << report.fingerprint << '\n';
  out << "# seed=" << report.seed << '\n';
  for (const auto& [k, v] : report.config) out << "# " << k << '=' << v << '\n';
  out << kCsvHeader << '\n';
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const SweepRow& r = report.rows[i];
    std::vector<int> retained(r.retained.begin(), r.retained.end());
    out << (i + 1) << ',' << channel_ids(r.channels) << ',' << r.channels.size() << ','
        << join_ints(retained, ';') << ',' << format_double(r.mean_f2) << ','
        << format_double(r.std_f2) << ',' << format_double(r.mean_f1) << ','
        << format_double(r.train_loss) << ',' << r.n_iters << ',' << (r.equivalent ? 1 : 0) << ','
        << join_ints(r.hidden, ';') << ',' << format_double(r.l2_alpha) << ',' << r.n_test << ','
        << r.n_targets << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

SweepReport read_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  const std::string file = path.string();
  SweepReport report;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  auto ints = [&](const std::string& cell) {
    std::vector<int> v;
    if (cell.empty()) return v;
    std::size_t start = 0;
    while (true) {
      const std::size_t semi = cell.find(';', start);
      v.push_back(static_cast<int>(parse_double(cell.substr(start, semi - start), file, lineno, 0)));
      if (semi == std::string::npos) break;
      start = semi + 1;
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# ", 0) == 0) {
      const std::string body = line.substr(2);
      const std::size_t eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = body.substr(0, eq), value = body.substr(eq + 1);
      if (key == "dataset_fingerprint") {
        report.fingerprint = value;
      } else if (key == "seed") {
        report.seed = std::stoull(value);
      } else {
        report.config.emplace_back(key, value);
      }
      continue;
    }
    if (!header_seen) {
      if (line != kCsvHeader) throw ParseError(file + ": unexpected header");
      header_seen = true;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 14) throw ParseError(file + ":" + std::to_string(lineno) + ": expected 14 columns");
    SweepRow r;
    std::size_t start = 0;
    const std::string& ids = f[1];
    while (true) {
      const std::size_t plus = ids.find('+', start);
      const std::string name = ids.substr(start, plus - start);
      auto k = parse_kind(name);
      if (!k) throw ParseError(file + ":" + std::to_string(lineno) + ": unknown channel " + name);
      r.channels.push_back(*k);
      if (plus == std::string::npos) break;
      start = plus + 1;
    }
    for (int v : ints(f[3])) r.retained.push_back(v);
    r.mean_f2 = parse_double(f[4], file, lineno, 4);
    r.std_f2 = parse_double(f[5], file, lineno, 5);
    r.mean_f1 = parse_double(f[6], file, lineno, 6);
    r.train_loss = parse_double(f[7], file, lineno, 7);
    r.n_iters = static_cast<int>(parse_double(f[8], file, lineno, 8));
    r.equivalent = parse_double(f[9], file, lineno, 9) != 0.0;
    r.hidden = ints(f[10]);
    r.l2_alpha = parse_double(f[11], file, lineno, 11);
    r.n_test = static_cast<Index>(parse_double(f[12], file, lineno, 12));
    r.n_targets = static_cast<Index>(parse_double(f[13], file, lineno, 13));
    report.rows.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError(file + ": no header row");
  return report;
}

std::string render_sweep_markdown(const SweepReport& report) {
  std::ostringstream os;
  os << "# Channel combination sweep\n\n";
  os << "- dataset fingerprint: `" << report.fingerprint << "`\n";
  os << "- seed: " << report.seed << "\n";
  for (const auto& [k, v] : report.config) os << "- " << k << ": " << v << "\n";
  os << "\nProfiles are equivalent when f1 is in [0, 15] and f2 is in [50, 100].\n";

  const char* titles[] = {"one measurement", "combination of two measurements",
                          "combination of three measurements", "combination of four measurements",
                          "all five measurements"};
  std::size_t max_size = 0;
  for (const auto& r : report.rows) max_size = std::max(max_size, r.channels.size());
  for (std::size_t size = 1; size <= max_size; ++size) {
    os << "\n## Results of the predictions using " << titles[size - 1] << "\n\n";
    os << "| Combination | mean f2 | std f2 | mean f1 | retained | equivalent |\n";
    os << "|---|---:|---:|---:|---|:---:|\n";
    for (const auto& r : report.rows) {
      if (r.channels.size() != size) continue;
      std::vector<int> retained(r.retained.begin(), r.retained.end());
      os << "| " << combination_label(r.channels) << " | " << format_fixed(r.mean_f2, 2) << " | "
         << format_fixed(r.std_f2, 2) << " | " << format_fixed(r.mean_f1, 2) << " | "
         << join_ints(retained, '/') << " | " << (r.equivalent ? "yes" : "no") << " |\n";
    }
  }

  os << "\n## Overall ranking\n\n";
  os << "| Rank | Combination | mean f2 |\n|---:|---|---:|\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    os << "| " << (i + 1) << " | " << combination_label(report.rows[i].channels) << " | "
       << format_fixed(report.rows[i].mean_f2, 2) << " |\n";
  }
  return os.str();
}

void write_sweep_markdown(const SweepReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << render_sweep_markdown(report);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace dissolve
