#include "dissolve/cli.hpp"

#include "dissolve/csv.hpp"
#include "dissolve/ingest.hpp"
#include "dissolve/pca.hpp"
#include "dissolve/preprocess.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;

namespace dissolve {

namespace {

double config_number(const std::string& section, const std::string& key, const std::string& value) {
  try {
    return parse_double(value, "[" + section + "]", 0, 0);
  } catch (const ParseError&) {
    throw BadConfig("[" + section + "] " + key + ": not a number: '" + value + "'");
  }
}

int config_int(const std::string& section, const std::string& key, const std::string& value) {
  const double v = config_number(section, key, value);
  if (v != static_cast<double>(static_cast<long long>(v))) {
    throw BadConfig("[" + section + "] " + key + ": expected an integer, got '" + value + "'");
  }
  return static_cast<int>(v);
}

std::vector<int> parse_layers(const std::string& text, const std::string& what) {
  std::vector<int> layers;
  for (const auto& cell : split_csv_line(text)) {
    const std::string c(trim(cell));
    if (c.empty()) continue;
    layers.push_back(config_int("mlp", what, c));
  }
  if (layers.empty()) throw BadConfig(what + ": no layer widths given");
  return layers;
}

// "64;128;128,64" -> {{64}, {128}, {128, 64}}
std::vector<std::vector<int>> parse_hidden_grid(const std::string& text) {
  std::vector<std::vector<int>> grid;
  std::size_t start = 0;
  while (true) {
    const std::size_t semi = text.find(';', start);
    grid.push_back(parse_layers(text.substr(start, semi - start), "hidden_grid"));
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  return grid;
}

std::vector<double> parse_alpha_grid(const std::string& text) {
  std::vector<double> grid;
  for (const auto& cell : split_csv_line(text)) {
    const std::string c(trim(cell));
    if (!c.empty()) grid.push_back(config_number("mlp", "alpha_grid", c));
  }
  if (grid.empty()) throw BadConfig("alpha_grid: no values given");
  return grid;
}

std::string render_hidden_grid(const std::vector<std::vector<int>>& grid) {
  std::string s;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) s += ';';
    for (std::size_t j = 0; j < grid[i].size(); ++j) {
      if (j) s += ',';
      s += std::to_string(grid[i][j]);
    }
  }
  return s;
}

std::string render_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v[i]);
  }
  return s;
}

std::vector<MeasurementKind> parse_channels(const std::string& text) {
  std::vector<MeasurementKind> out;
  for (const auto& cell : split_csv_line(text)) {
    const std::string name(trim(cell));
    auto k = parse_kind(name);
    if (!k) {
      throw BadConfig("unknown channel '" + name +
                      "' (expected nir_re, nir_tr, raman_re, raman_tr, compression)");
    }
    out.push_back(*k);
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%8.4f%%", 100.0 * v);
  return buf;
}

int cmd_generate(const RunConfig& cfg) {
  GeneratorConfig gen = cfg.generator;
  gen.seed = cfg.seed;
  const Dataset ds = generate(gen);
  const ValidationReport report = validate(ds);
  if (!report.ok()) throw NumericalError("generated dataset failed validation: " + report.violations.front().message);
  ensure_dir(cfg.out_dir);
  const Manifest m = save_dataset(ds, cfg.out_dir);
  std::cout << "wrote " << m.n_samples << " samples to " << (cfg.out_dir / "manifest.txt").string() << "\n";
  std::cout << "fingerprint " << fingerprint(ds) << "\n";
  return kExitOk;
}

int cmd_validate(const fs::path& manifest) {
  const Dataset ds = load_dataset(manifest);
  const ValidationReport report = validate(ds);
  std::cout << "samples " << ds.n_samples() << ", fingerprint " << fingerprint(ds) << "\n";
  if (report.ok()) {
    std::cout << "dataset is well-formed\n";
    return kExitOk;
  }
  for (const auto& v : report.violations) std::cout << v.message << "\n";
  std::cout << report.violations.size() << " violation(s)\n";
  return kExitData;
}

int cmd_pca(const RunConfig& cfg, const fs::path& manifest, const std::string& channel, bool merged,
            double threshold, bool dump_model) {
  if (merged == !channel.empty()) throw BadConfig("pca needs exactly one of --channel or --merged");
  const Dataset ds = load_dataset(manifest);

  std::string target;
  Matrix data;
  if (merged) {
    target = "merged";
    std::vector<Matrix> blocks;
    for (MeasurementKind k : kCanonicalOrder) {
      const Matrix& X = ds.block(k).values;
      blocks.push_back(scaler_transform(scaler_fit(X), X));
    }
    data = concat_rows<double>(blocks);
  } else {
    const auto kinds = parse_channels(channel);
    if (kinds.size() != 1) throw BadConfig("--channel takes a single channel");
    target = std::string(short_name(kinds.front()));
    const Matrix& X = ds.block(kinds.front()).values;
    data = scaler_transform(scaler_fit(X), X);
  }

  PcaModel<double> model = pca_fit(data);
  const Vector ratios = explained_ratios(model);
  const Vector cum = cumulative_ratios(model);
  const Index retained = select_components(model, threshold);

  const Index shown = std::min<Index>(ratios.size(), std::max<Index>(retained + 5, 10));
  std::cout << "PCA of " << target << " (" << data.rows() << " x " << data.cols() << ")\n";
  std::cout << "component   explained  cumulative\n";
  for (Index i = 0; i < shown; ++i) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%9lld", static_cast<long long>(i + 1));
    std::cout << buf << "  " << pct(ratios[i]) << "  " << pct(cum[i]) << "\n";
  }
  std::cout << "retained " << retained << " component(s) at threshold " << format_double(threshold) << "\n";

  ensure_dir(cfg.out_dir);
  std::string csv = "component,explained,cumulative\n";
  for (Index i = 0; i < ratios.size(); ++i) {
    csv += std::to_string(i + 1) + "," + format_double(ratios[i]) + "," + format_double(cum[i]) + "\n";
  }
  write_text(cfg.out_dir / ("variance_" + target + ".csv"), csv);

  if (dump_model) {
    std::string dump = "mean";
    for (Index j = 0; j < model.mean.size(); ++j) dump += "," + format_double(model.mean[j]);
    dump += "\neigenvalues";
    for (Index j = 0; j < model.eigenvalues.size(); ++j) dump += "," + format_double(model.eigenvalues[j]);
    dump += "\n";
    for (Index c = 0; c < model.retained; ++c) {
      dump += "component_" + std::to_string(c + 1);
      for (Index j = 0; j < model.components.rows(); ++j) dump += "," + format_double(model.components(j, c));
      dump += "\n";
    }
    write_text(cfg.out_dir / ("pca_" + target + ".csv"), dump);
  }
  return kExitOk;
}

void print_row(const SweepRow& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "mean f2 %.2f (sd %.2f), mean f1 %.2f, %s", r.mean_f2, r.std_f2, r.mean_f1,
                r.equivalent ? "equivalent" : "not equivalent");
  std::cout << combination_label(r.channels) << ": " << buf << "\n";
}

int cmd_train(const RunConfig& cfg, const fs::path& manifest, const std::string& channels) {
  const Dataset ds = load_dataset(manifest);
  CombinationSpec spec = cfg.combination;
  spec.channels = parse_channels(channels);
  spec.mlp.seed = cfg.seed;
  SplitSpec split_spec = cfg.split;
  split_spec.seed = cfg.seed;
  const CombinationResult res = run_combination(ds, split_spec, spec, cfg.repeats);
  print_row(res.row);
  std::cout << "network";
  for (int w : res.row.hidden) std::cout << ' ' << w;
  std::cout << ", l2_alpha " << format_double(res.row.l2_alpha) << ", " << res.model.n_iters
            << " iterations, train loss " << format_double(res.model.train_loss) << "\n";

  ensure_dir(cfg.out_dir);
  std::string tag;
  for (MeasurementKind k : res.row.channels) tag += (tag.empty() ? "" : "-") + std::string(short_name(k));
  save_mlp(res.model, cfg.out_dir / ("mlp_" + tag + ".csv"));
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const fs::path& manifest) {
  const Dataset ds = load_dataset(manifest);
  SplitSpec split_spec = cfg.split;
  split_spec.seed = cfg.seed;
  // Bound checks happen before any training starts.
  enumerate_combinations(cfg.max_size);
  SweepReport report = sweep(ds, split_spec, cfg.combination, cfg.max_size, cfg.jobs, cfg.repeats);
  report.config = cfg.provenance();
  ensure_dir(cfg.out_dir);
  write_sweep_csv(report, cfg.out_dir / "sweep_report.csv");
  write_sweep_markdown(report, cfg.out_dir / "sweep_report.md");
  std::cout << report.rows.size() << " combinations, report in " << (cfg.out_dir / "sweep_report.csv").string()
            << "\n";
  std::cout << "top: ";
  print_row(report.rows.front());
  return kExitOk;
}

int cmd_report(const RunConfig& cfg, const fs::path& input, bool write_md) {
  const SweepReport report = read_sweep_csv(input);
  const std::string md = render_sweep_markdown(report);
  std::cout << md;
  if (write_md) {
    ensure_dir(cfg.out_dir);
    write_text(cfg.out_dir / "sweep_report.md", md);
  }
  return kExitOk;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> RunConfig::provenance() const {
  return {
      {"split.test_count", std::to_string(split.test_count)},
      {"split.grouping", std::string(to_string(split.grouping))},
      {"sweep.max_size", std::to_string(max_size)},
      {"sweep.repeats", std::to_string(repeats)},
      {"sweep.pca_threshold", format_double(combination.pca_threshold)},
      {"sweep.target_offset", std::to_string(combination.target_offset)},
      {"mlp.hidden_grid", render_hidden_grid(combination.grid.hidden)},
      {"mlp.alpha_grid", render_doubles(combination.grid.l2_alpha)},
      {"mlp.max_iter", std::to_string(combination.mlp.max_iter)},
      {"mlp.grad_tol", format_double(combination.mlp.grad_tol)},
      {"mlp.history_size", std::to_string(combination.mlp.history_size)},
  };
}

void apply_config_file(RunConfig& cfg, const KeyValueFile& file) {
  for (const auto& section : file.sections) {
    if (section.name.empty()) {
      if (!section.entries.empty()) {
        throw BadConfig("unknown key '" + section.entries.front().first + "' outside a section");
      }
    } else if (section.name == "generator") {
      KeyValueSection rest{section.name, {}};
      for (const auto& [k, v] : section.entries) {
        if (k == "preset") {
          auto p = parse_preset(v);
          if (!p) throw BadConfig("[generator] preset: unknown preset '" + v + "'");
          cfg.preset = *p;
          cfg.generator = preset_config(*p);
        } else {
          rest.entries.emplace_back(k, v);
        }
      }
      apply_generator_section(cfg.generator, rest);
    } else if (section.name == "split") {
      for (const auto& [k, v] : section.entries) {
        if (k == "test_count") {
          cfg.split.test_count = config_int("split", k, v);
        } else if (k == "grouping") {
          auto g = parse_grouping(v);
          if (!g) throw BadConfig("[split] grouping must be 'sample' or 'tablet'");
          cfg.split.grouping = *g;
        } else {
          throw BadConfig("[split] unknown key '" + k + "'");
        }
      }
    } else if (section.name == "mlp") {
      for (const auto& [k, v] : section.entries) {
        if (k == "hidden_grid") {
          cfg.combination.grid.hidden = parse_hidden_grid(v);
        } else if (k == "alpha_grid") {
          cfg.combination.grid.l2_alpha = parse_alpha_grid(v);
        } else if (k == "max_iter") {
          cfg.combination.mlp.max_iter = config_int("mlp", k, v);
        } else if (k == "grad_tol") {
          cfg.combination.mlp.grad_tol = config_number("mlp", k, v);
        } else if (k == "history_size") {
          cfg.combination.mlp.history_size = config_int("mlp", k, v);
        } else {
          throw BadConfig("[mlp] unknown key '" + k + "'");
        }
      }
    } else if (section.name == "sweep") {
      for (const auto& [k, v] : section.entries) {
        if (k == "max_size") {
          cfg.max_size = config_int("sweep", k, v);
        } else if (k == "repeats") {
          cfg.repeats = config_int("sweep", k, v);
        } else if (k == "pca_threshold") {
          cfg.combination.pca_threshold = config_number("sweep", k, v);
        } else if (k == "target_offset") {
          cfg.combination.target_offset = config_int("sweep", k, v);
        } else {
          throw BadConfig("[sweep] unknown key '" + k + "'");
        }
      }
    } else {
      throw BadConfig("unknown config section [" + section.name + "]");
    }
  }
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Dissolution profile prediction from spectroscopy and compression data"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string out_dir = ".";
  auto* opt_config = app.add_option("--config", config_path, "Key-value config file ([generator], [split], [mlp], [sweep])");
  app.add_option("--seed", seed, "Seed for all randomness (generator, split, network init)");
  app.add_option("--jobs", jobs, "Parallel jobs for the sweep (results do not depend on it)")->check(CLI::PositiveNumber);
  app.add_option("-o,--out", out_dir, "Output directory");

  std::string preset_name;
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset (manifest + CSV files)");
  auto* opt_preset = gen->add_option("--preset", preset_name, "paper | small | test")
                         ->check(CLI::IsMember({"paper", "small", "test"}));

  std::string manifest = ".";
  auto* val = app.add_subcommand("validate", "Check a dataset against its invariants");
  val->add_option("manifest", manifest, "Manifest file or dataset directory");

  std::string channel;
  bool merged = false;
  bool dump_model = false;
  double threshold = kDefaultRetention;
  auto* pca = app.add_subcommand("pca", "Explained and cumulative variance of one channel or of the merged matrix");
  pca->add_option("manifest", manifest, "Manifest file or dataset directory");
  pca->add_option("--channel", channel, "Channel: nir_re, nir_tr, raman_re, raman_tr, compression");
  pca->add_flag("--merged", merged, "Standardize every channel, concatenate, then run PCA");
  auto* opt_pca_threshold = pca->add_option("--threshold", threshold, "Cumulative variance to retain");
  pca->add_flag("--dump-model", dump_model, "Also write pca_<target>.csv");

  // Options shared by train and sweep.
  Index test_count = 0;
  std::string grouping;
  int target_offset = 0;
  int repeats = 1;
  auto add_experiment_opts = [&](CLI::App* sub, std::vector<CLI::Option*>& opts) {
    opts.push_back(sub->add_option("--test-count", test_count, "Held-out samples (default 49)"));
    opts.push_back(sub->add_option("--grouping", grouping, "sample | tablet")->check(CLI::IsMember({"sample", "tablet"})));
    opts.push_back(sub->add_option("--threshold", threshold, "PCA cumulative variance to retain (default 0.99)"));
    opts.push_back(sub->add_option("--target-offset", target_offset, "Leading dissolution points used as inputs"));
    opts.push_back(sub->add_option("--repeats", repeats, "Average over this many random splits"));
  };

  std::string channels;
  std::string hidden;
  std::vector<double> alphas;
  std::vector<CLI::Option*> train_opts;
  auto* trn = app.add_subcommand("train", "Train and evaluate one channel combination");
  trn->add_option("manifest", manifest, "Manifest file or dataset directory");
  trn->add_option("--channels", channels, "Comma-separated channels, e.g. nir_tr,compression")->required();
  auto* opt_hidden = trn->add_option("--hidden", hidden, "Hidden layer widths, e.g. 128,64 (skips the grid)");
  auto* opt_alpha = trn->add_option("--alpha", alphas, "L2 penalty value(s) (skips the grid)")->delimiter(',');
  add_experiment_opts(trn, train_opts);

  int max_size = 3;
  std::vector<CLI::Option*> sweep_opts;
  auto* swp = app.add_subcommand("sweep", "Rank all channel combinations by mean f2");
  swp->add_option("manifest", manifest, "Manifest file or dataset directory");
  auto* opt_max = swp->add_option("--max-size", max_size, "Largest combination size (1-5)");
  add_experiment_opts(swp, sweep_opts);

  std::string report_input = "sweep_report.csv";
  bool write_md = false;
  auto* rep = app.add_subcommand("report", "Render a sweep_report.csv as ranked tables");
  rep->add_option("input", report_input, "sweep_report.csv to render");
  rep->add_flag("--write", write_md, "Also write sweep_report.md into the output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig cfg;
    if (opt_config->count() > 0) {
      KeyValueFile file;
      try {
        file = KeyValueFile::read(config_path);
      } catch (const Error& e) {
        throw BadConfig(std::string("config: ") + e.what());
      }
      apply_config_file(cfg, file);
    }
    cfg.seed = seed;
    cfg.jobs = jobs;
    cfg.out_dir = out_dir;
    if (opt_preset->count() > 0) {
      cfg.preset = *parse_preset(preset_name);
      const auto section = opt_config->count() > 0 ? KeyValueFile::read(config_path) : KeyValueFile{};
      cfg.generator = preset_config(cfg.preset);
      // Config keys still refine the preset chosen on the command line.
      if (const auto* s = section.section("generator")) {
        KeyValueSection rest{"generator", {}};
        for (const auto& [k, v] : s->entries) {
          if (k != "preset") rest.entries.emplace_back(k, v);
        }
        apply_generator_section(cfg.generator, rest);
      }
    }
    if (opt_max->count() > 0) cfg.max_size = max_size;
    if (opt_pca_threshold->count() > 0) cfg.combination.pca_threshold = threshold;
    auto apply_experiment = [&](const std::vector<CLI::Option*>& opts) {
      if (opts[0]->count() > 0) cfg.split.test_count = test_count;
      if (opts[1]->count() > 0) cfg.split.grouping = *parse_grouping(grouping);
      if (opts[2]->count() > 0) cfg.combination.pca_threshold = threshold;
      if (opts[3]->count() > 0) cfg.combination.target_offset = target_offset;
      if (opts[4]->count() > 0) cfg.repeats = repeats;
    };
    if (cfg.repeats < 1) throw BadConfig("repeats must be >= 1");

    if (gen->parsed()) {
      check_config(cfg.generator);
      return cmd_generate(cfg);
    }
    if (val->parsed()) return cmd_validate(manifest);
    if (pca->parsed()) return cmd_pca(cfg, manifest, channel, merged, cfg.combination.pca_threshold, dump_model);
    if (trn->parsed()) {
      apply_experiment(train_opts);
      if (opt_hidden->count() > 0) cfg.combination.grid.hidden = {parse_layers(hidden, "--hidden")};
      if (opt_alpha->count() > 0) cfg.combination.grid.l2_alpha = alphas;
      if (cfg.repeats < 1) throw BadConfig("--repeats must be >= 1");
      return cmd_train(cfg, manifest, channels);
    }
    if (swp->parsed()) {
      apply_experiment(sweep_opts);
      if (cfg.max_size < 1 || cfg.max_size > kNumKinds) {
        throw BadConfig("--max-size must lie in [1, 5] (there are 5 channels), got " + std::to_string(cfg.max_size));
      }
      if (cfg.repeats < 1) throw BadConfig("--repeats must be >= 1");
      return cmd_sweep(cfg, manifest);
    }
    if (rep->parsed()) return cmd_report(cfg, report_input, write_md);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace dissolve
