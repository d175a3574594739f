#include "dissolve/ingest.hpp"

#include "dissolve/csv.hpp"
#include "dissolve/keyvalue.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace fs = std::filesystem;

namespace dissolve {

namespace {

constexpr const char* kMetaHeader =
    "sample_id,setting_id,tablet_id,replicate_id,dr_content,hpmc_content,nominal_force";

struct CsvTable {
  std::vector<std::int64_t> ids;  // first column
  Matrix values;                  // remaining columns
};

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    pos = eol + 1;
  }
  return lines;
}

// Parses one line of comma-separated numbers into `out` (cleared first).
void parse_row(std::string_view line, const std::string& file, std::size_t row,
               std::vector<double>& out) {
  out.clear();
  std::size_t start = 0;
  std::size_t col = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string_view cell =
        line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    out.push_back(parse_double(cell, file, row, col));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
    ++col;
  }
}

std::int64_t to_id(double v, const std::string& file, std::size_t row) {
  const auto id = static_cast<std::int64_t>(v);
  if (static_cast<double>(id) != v) {
    throw ParseError(file + ": row " + std::to_string(row) + ", column 0: sample_id is not an integer");
  }
  return id;
}

// Table with an id column. `skip_header` drops the first line.
CsvTable read_id_table(const fs::path& path, bool skip_header, std::vector<std::string>* header) {
  const std::string text = read_text(path);
  const std::string file = path.string();
  auto lines = lines_of(text);
  std::size_t first = 0;
  if (skip_header) {
    if (lines.empty()) throw ShapeError(file + ": missing header row");
    if (header) *header = split_csv_line(lines[0]);
    first = 1;
  }
  CsvTable table;
  const std::size_t rows = lines.size() - first;
  std::vector<double> cells;
  Index width = -1;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t fileRow = r + first;
    parse_row(lines[fileRow], file, fileRow, cells);
    const auto w = static_cast<Index>(cells.size()) - 1;
    if (width < 0) {
      width = w;
      table.values.resize(static_cast<Index>(rows), width);
    } else if (w != width) {
      throw ShapeError(file + ": row " + std::to_string(fileRow) + " has " + std::to_string(w) +
                       " value columns, expected " + std::to_string(width));
    }
    table.ids.push_back(to_id(cells[0], file, fileRow));
    for (Index c = 0; c < width; ++c) table.values(static_cast<Index>(r), c) = cells[static_cast<std::size_t>(c) + 1];
  }
  if (width < 0) table.values.resize(0, 0);
  return table;
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string matrix_rows_csv(const std::vector<SampleMeta>& meta, const Matrix& values) {
  std::string s;
  s.reserve(static_cast<std::size_t>(values.size()) * 24);
  for (Index r = 0; r < values.rows(); ++r) {
    s += std::to_string(meta[static_cast<std::size_t>(r)].sample_id);
    for (Index c = 0; c < values.cols(); ++c) {
      s += ',';
      s += format_double(values(r, c));
    }
    s += '\n';
  }
  return s;
}

std::string vector_csv(const Vector& v) {
  std::string s;
  for (Index i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v[i]);
  }
  s += '\n';
  return s;
}

Index parse_count(const std::string& value, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size() || v < 0) throw std::invalid_argument(value);
    return static_cast<Index>(v);
  } catch (const std::exception&) {
    throw ManifestError("manifest: '" + what + "' is not a non-negative integer: '" + value + "'");
  }
}

}  // namespace

Manifest Manifest::parse(const std::string& text, const std::string& origin) {
  KeyValueFile kv;
  try {
    kv = KeyValueFile::parse(text, origin);
  } catch (const ParseError& e) {
    throw ManifestError(e.what());
  }
  auto require = [&origin](const KeyValueSection& s, const char* key) {
    auto v = s.find(key);
    if (!v || v->empty()) {
      throw ManifestError(origin + ": missing key '" + key + "'" +
                          (s.name.empty() ? std::string() : " in [" + s.name + "]"));
    }
    return *v;
  };

  Manifest m;
  const KeyValueSection& top = kv.sections.front();
  m.format_version = static_cast<int>(parse_count(require(top, "format_version"), "format_version"));
  if (m.format_version != kManifestFormatVersion) {
    throw ManifestError(origin + ": unsupported format_version " + std::to_string(m.format_version));
  }
  m.dataset_name = require(top, "dataset_name");
  m.n_samples = parse_count(require(top, "n_samples"), "n_samples");

  bool have_profiles = false, have_meta = false;
  for (const auto& s : kv.sections) {
    if (s.name.empty()) continue;
    if (s.name.rfind("channel:", 0) == 0) {
      const std::string kind_name = s.name.substr(8);
      auto kind = parse_kind(kind_name);
      if (!kind) throw ManifestError(origin + ": unknown channel '" + kind_name + "'");
      for (const auto& existing : m.channels) {
        if (existing.kind == *kind) throw ManifestError(origin + ": channel listed twice: " + kind_name);
      }
      m.channels.push_back({*kind, require(s, "file"), require(s, "axis_file"),
                            parse_count(require(s, "n_features"), "n_features")});
    } else if (s.name == "profiles") {
      m.profile_file = require(s, "file");
      have_profiles = true;
    } else if (s.name == "meta") {
      m.meta_file = require(s, "file");
      have_meta = true;
    } else {
      throw ManifestError(origin + ": unknown section [" + s.name + "]");
    }
  }
  if (!have_profiles) throw ManifestError(origin + ": missing [profiles] section");
  if (!have_meta) throw ManifestError(origin + ": missing [meta] section");
  std::sort(m.channels.begin(), m.channels.end(), [](const ChannelEntry& a, const ChannelEntry& b) {
    return canonical_rank(a.kind) < canonical_rank(b.kind);
  });
  return m;
}

std::string Manifest::render() const {
  KeyValueFile kv;
  kv.sections.push_back({});
  auto& top = kv.sections.front();
  top.set("format_version", std::to_string(format_version));
  top.set("dataset_name", dataset_name);
  top.set("n_samples", std::to_string(n_samples));
  for (const auto& c : channels) {
    auto& s = kv.add_section("channel:" + std::string(short_name(c.kind)));
    s.set("file", c.file.generic_string());
    s.set("axis_file", c.axis_file.generic_string());
    s.set("n_features", std::to_string(c.n_features));
  }
  kv.add_section("profiles").set("file", profile_file.generic_string());
  kv.add_section("meta").set("file", meta_file.generic_string());
  return kv.render();
}

fs::path resolve_manifest_path(const fs::path& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) return path / "manifest.txt";
  return path;
}

Dataset load_dataset(const fs::path& manifest_path) {
  const fs::path path = resolve_manifest_path(manifest_path);
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw ManifestError("manifest not found: " + path.string());
  std::string text;
  try {
    text = read_text(path);
  } catch (const IoError& e) {
    throw ManifestError(e.what());
  }
  const Manifest m = Manifest::parse(text, path.string());
  const fs::path base = path.parent_path();

  Dataset ds;
  ds.name = m.dataset_name;

  // Metadata defines the reference row order.
  const fs::path meta_path = resolve(base, m.meta_file);
  const CsvTable meta = read_id_table(meta_path, true, nullptr);
  if (static_cast<Index>(meta.ids.size()) != m.n_samples) {
    throw ShapeError(meta_path.string() + ": " + std::to_string(meta.ids.size()) +
                     " rows, manifest says " + std::to_string(m.n_samples));
  }
  if (m.n_samples > 0 && meta.values.cols() != 6) {
    throw ShapeError(meta_path.string() + ": expected 7 columns");
  }
  for (std::size_t r = 0; r < meta.ids.size(); ++r) {
    const auto row = static_cast<Index>(r);
    auto as_int = [&](Index c) {
      const double v = meta.values(row, c);
      if (static_cast<double>(static_cast<std::int64_t>(v)) != v) {
        throw ParseError(meta_path.string() + ": row " + std::to_string(r + 1) + ", column " +
                         std::to_string(c + 1) + ": expected an integer");
      }
      return static_cast<std::int64_t>(v);
    };
    SampleMeta sm;
    sm.sample_id = meta.ids[r];
    sm.setting_id = static_cast<int>(as_int(0));
    sm.tablet_id = as_int(1);
    sm.replicate_id = static_cast<int>(as_int(2));
    sm.dr_content = meta.values(row, 3);
    sm.hpmc_content = meta.values(row, 4);
    sm.nominal_force = meta.values(row, 5);
    ds.meta.push_back(sm);
  }

  auto check_ids = [&](const CsvTable& t, const fs::path& file) {
    if (static_cast<Index>(t.ids.size()) != m.n_samples) {
      throw ShapeError(file.string() + ": " + std::to_string(t.ids.size()) +
                       " rows, manifest says " + std::to_string(m.n_samples));
    }
    if (t.ids != meta.ids) {
      throw ShapeError(file.string() + ": sample_id column disagrees with " + meta_path.string());
    }
  };

  for (const ChannelEntry& c : m.channels) {
    const fs::path file = resolve(base, c.file);
    CsvTable t = read_id_table(file, false, nullptr);
    check_ids(t, file);
    if (m.n_samples > 0 && t.values.cols() != c.n_features) {
      throw ShapeError(file.string() + ": " + std::to_string(t.values.cols()) +
                       " value columns, manifest says " + std::to_string(c.n_features));
    }
    const fs::path axis_file = resolve(base, c.axis_file);
    const std::string axis_text = read_text(axis_file);
    const auto axis_lines = lines_of(axis_text);
    if (axis_lines.size() != 1) throw ShapeError(axis_file.string() + ": expected exactly one row");
    std::vector<double> axis;
    parse_row(axis_lines[0], axis_file.string(), 0, axis);
    if (static_cast<Index>(axis.size()) != c.n_features) {
      throw ShapeError(axis_file.string() + ": " + std::to_string(axis.size()) +
                       " values, manifest says " + std::to_string(c.n_features));
    }
    SpectralBlock blk{c.kind, Eigen::Map<const Vector>(axis.data(), c.n_features), std::move(t.values)};
    if (m.n_samples == 0) blk.values.resize(0, c.n_features);
    ds.blocks.emplace(c.kind, std::move(blk));
  }

  const fs::path profile_path = resolve(base, m.profile_file);
  std::vector<std::string> header;
  CsvTable profiles = read_id_table(profile_path, true, &header);
  check_ids(profiles, profile_path);
  ds.times.resize(static_cast<Index>(header.size()) - 1);
  for (std::size_t i = 1; i < header.size(); ++i) {
    ds.times[static_cast<Index>(i) - 1] = parse_double(header[i], profile_path.string(), 0, i);
  }
  if (m.n_samples > 0 && profiles.values.cols() != ds.times.size()) {
    throw ShapeError(profile_path.string() + ": header and rows differ in width");
  }
  ds.profiles = std::move(profiles.values);
  if (m.n_samples == 0) ds.profiles.resize(0, ds.times.size());

  std::vector<Index> order(meta.ids.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return meta.ids[static_cast<std::size_t>(a)] < meta.ids[static_cast<std::size_t>(b)];
  });
  if (!std::is_sorted(meta.ids.begin(), meta.ids.end())) ds = ds.subset(order);
  return ds;
}

Manifest save_dataset(const Dataset& ds, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());

  Manifest m;
  m.dataset_name = ds.name;
  m.n_samples = ds.n_samples();
  for (MeasurementKind kind : kCanonicalOrder) {
    auto it = ds.blocks.find(kind);
    if (it == ds.blocks.end()) continue;
    const std::string stem(short_name(kind));
    ChannelEntry c{kind, stem + ".csv", stem + ".axis.csv", it->second.values.cols()};
    write_file(dir / c.file, matrix_rows_csv(ds.meta, it->second.values));
    write_file(dir / c.axis_file, vector_csv(it->second.axis));
    m.channels.push_back(c);
  }

  m.profile_file = "profiles.csv";
  std::string prof = "sample_id";
  for (Index i = 0; i < ds.times.size(); ++i) prof += "," + format_double(ds.times[i]);
  prof += '\n';
  prof += matrix_rows_csv(ds.meta, ds.profiles);
  write_file(dir / m.profile_file, prof);

  m.meta_file = "meta.csv";
  std::string meta = std::string(kMetaHeader) + "\n";
  for (const SampleMeta& s : ds.meta) {
    meta += std::to_string(s.sample_id) + ',' + std::to_string(s.setting_id) + ',' +
            std::to_string(s.tablet_id) + ',' + std::to_string(s.replicate_id) + ',' +
            format_double(s.dr_content) + ',' + format_double(s.hpmc_content) + ',' +
            format_double(s.nominal_force) + '\n';
  }
  write_file(dir / m.meta_file, meta);

  write_file(dir / "manifest.txt", m.render());
  return m;
}

}  // namespace dissolve
