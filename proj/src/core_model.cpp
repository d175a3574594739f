#include "dissolve/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <set>
#include <sstream>

namespace dissolve {

namespace {

struct KindInfo {
  MeasurementKind kind;
  std::string_view short_name;
  std::string_view display;
  Index features;
};

constexpr std::array<KindInfo, kNumKinds> kKindTable = {{
    {MeasurementKind::NirReflection, "nir_re", "NIR RE", 1556},
    {MeasurementKind::NirTransmission, "nir_tr", "NIR TR", 714},
    {MeasurementKind::RamanReflection, "raman_re", "RAMAN RE", 1691},
    {MeasurementKind::RamanTransmission, "raman_tr", "RAMAN TR", 1691},
    {MeasurementKind::CompressionForce, "compression", "Comp Force", 6037},
}};

const KindInfo& info(MeasurementKind kind) {
  for (const auto& k : kKindTable) {
    if (k.kind == kind) return k;
  }
  throw std::logic_error("unknown measurement kind");
}

bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

bool same_vector(const Vector& a, const Vector& b) {
  return a.size() == b.size() && a == b;
}

std::string describe(std::optional<MeasurementKind> kind, Index row, Index col) {
  std::ostringstream os;
  os << (kind ? short_name(*kind) : std::string_view("profiles"));
  if (row >= 0) os << " row " << row;
  if (col >= 0) os << " column " << col;
  return os.str();
}

}  // namespace

int canonical_rank(MeasurementKind kind) {
  auto it = std::find(kCanonicalOrder.begin(), kCanonicalOrder.end(), kind);
  return static_cast<int>(it - kCanonicalOrder.begin());
}

std::string_view short_name(MeasurementKind kind) { return info(kind).short_name; }

std::string_view display_name(MeasurementKind kind) { return info(kind).display; }

std::optional<MeasurementKind> parse_kind(std::string_view name) {
  for (const auto& k : kKindTable) {
    if (k.short_name == name) return k.kind;
  }
  return std::nullopt;
}

Index default_feature_count(MeasurementKind kind) { return info(kind).features; }

Vector time_grid() {
  Vector t(kTimePoints);
  const double head[] = {2, 5, 10, 15, 30, 45, 60};
  for (Index i = 0; i < 7; ++i) t[i] = head[i];
  for (Index i = 7; i < kTimePoints; ++i) t[i] = 60.0 + 30.0 * static_cast<double>(i - 6);
  return t;
}

const SpectralBlock& Dataset::block(MeasurementKind kind) const {
  auto it = blocks.find(kind);
  if (it == blocks.end()) {
    throw BadSpec("dataset has no channel '" + std::string(short_name(kind)) + "'");
  }
  return it->second;
}

Dataset Dataset::subset(const std::vector<Index>& idx) const {
  Dataset out;
  out.name = name;
  out.times = times;
  const auto rows = static_cast<Index>(idx.size());
  for (const auto& [kind, blk] : blocks) {
    SpectralBlock b{kind, blk.axis, Matrix(rows, blk.values.cols())};
    for (Index r = 0; r < rows; ++r) b.values.row(r) = blk.values.row(idx[r]);
    out.blocks.emplace(kind, std::move(b));
  }
  out.profiles.resize(rows, profiles.cols());
  for (Index r = 0; r < rows; ++r) {
    out.profiles.row(r) = profiles.row(idx[r]);
    out.meta.push_back(meta[static_cast<std::size_t>(idx[r])]);
  }
  return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.name != b.name || a.meta != b.meta) return false;
  if (!same_vector(a.times, b.times) || !same_matrix(a.profiles, b.profiles)) return false;
  if (a.blocks.size() != b.blocks.size()) return false;
  for (const auto& [kind, blk] : a.blocks) {
    auto it = b.blocks.find(kind);
    if (it == b.blocks.end()) return false;
    if (!same_vector(blk.axis, it->second.axis) || !same_matrix(blk.values, it->second.values)) {
      return false;
    }
  }
  return true;
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::RowCountMismatch: return "row-count-mismatch";
    case ViolationCode::AxisLengthMismatch: return "axis-length-mismatch";
    case ViolationCode::NonFinite: return "non-finite";
    case ViolationCode::NegativeValue: return "negative-value";
    case ViolationCode::MissingChannel: return "missing-channel";
    case ViolationCode::TimeGridMismatch: return "time-grid-mismatch";
    case ViolationCode::ProfileOutOfRange: return "profile-out-of-range";
    case ViolationCode::BadMeta: return "bad-meta";
    case ViolationCode::DuplicateReplicate: return "duplicate-replicate";
  }
  return "unknown";
}

std::size_t ValidationReport::count(ViolationCode code) const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(), [code](const Violation& v) { return v.code == code; }));
}

ValidationReport validate(const Dataset& ds) {
  ValidationReport report;
  auto add = [&report](ViolationCode code, std::optional<MeasurementKind> kind, Index row,
                       Index col, std::string detail) {
    std::string msg = std::string(to_string(code)) + ": " + describe(kind, row, col);
    if (!detail.empty()) msg += " (" + detail + ")";
    report.violations.push_back({code, kind, row, col, std::move(msg)});
  };

  const Index n = ds.n_samples();

  for (MeasurementKind kind : kCanonicalOrder) {
    auto it = ds.blocks.find(kind);
    if (it == ds.blocks.end()) {
      add(ViolationCode::MissingChannel, kind, -1, -1, "");
      continue;
    }
    const SpectralBlock& blk = it->second;
    if (blk.values.rows() != n) {
      add(ViolationCode::RowCountMismatch, kind, -1, -1,
          std::to_string(blk.values.rows()) + " rows, expected " + std::to_string(n));
    }
    if (blk.axis.size() != blk.values.cols()) {
      add(ViolationCode::AxisLengthMismatch, kind, -1, -1,
          "axis " + std::to_string(blk.axis.size()) + " vs " +
              std::to_string(blk.values.cols()) + " columns");
    }
    for (Index c = 0; c < blk.axis.size(); ++c) {
      if (!std::isfinite(blk.axis[c])) add(ViolationCode::NonFinite, kind, -1, c, "axis");
    }
    for (Index r = 0; r < blk.values.rows(); ++r) {
      for (Index c = 0; c < blk.values.cols(); ++c) {
        const double v = blk.values(r, c);
        if (!std::isfinite(v)) {
          add(ViolationCode::NonFinite, kind, r, c, "");
        } else if (v < 0.0) {
          add(ViolationCode::NegativeValue, kind, r, c, std::to_string(v));
        }
      }
    }
  }

  if (ds.profiles.rows() != n) {
    add(ViolationCode::RowCountMismatch, std::nullopt, -1, -1,
        std::to_string(ds.profiles.rows()) + " profile rows, expected " + std::to_string(n));
  }
  if (ds.profiles.cols() != kTimePoints) {
    add(ViolationCode::TimeGridMismatch, std::nullopt, -1, -1,
        std::to_string(ds.profiles.cols()) + " profile columns, expected " +
            std::to_string(kTimePoints));
  }
  const Vector grid = time_grid();
  if (ds.times.size() != kTimePoints || ds.times != grid) {
    add(ViolationCode::TimeGridMismatch, std::nullopt, -1, -1, "time axis differs from the 53-point grid");
  }
  for (Index r = 0; r < ds.profiles.rows(); ++r) {
    for (Index c = 0; c < ds.profiles.cols(); ++c) {
      const double v = ds.profiles(r, c);
      if (!std::isfinite(v)) {
        add(ViolationCode::NonFinite, std::nullopt, r, c, "");
      } else if (v < 0.0 || v > kProfileCeiling) {
        add(ViolationCode::ProfileOutOfRange, std::nullopt, r, c, std::to_string(v));
      }
    }
  }

  // Sample metadata: ranges, uniqueness, and a balanced design.
  std::set<std::int64_t> sample_ids;
  std::set<std::pair<std::int64_t, int>> replicate_keys;
  std::map<std::int64_t, int> tablet_setting;
  std::map<std::int64_t, int> replicates_per_tablet;
  std::map<int, std::set<std::int64_t>> tablets_per_setting;
  for (Index r = 0; r < n; ++r) {
    const SampleMeta& m = ds.meta[static_cast<std::size_t>(r)];
    if (m.setting_id < 1 || m.setting_id > 37) {
      add(ViolationCode::BadMeta, std::nullopt, r, -1, "setting_id outside [1,37]");
    }
    if (m.replicate_id < 1 || m.replicate_id > 2) {
      add(ViolationCode::BadMeta, std::nullopt, r, -1, "replicate_id outside {1,2}");
    }
    if (!sample_ids.insert(m.sample_id).second) {
      add(ViolationCode::BadMeta, std::nullopt, r, -1, "duplicate sample_id");
    }
    if (!replicate_keys.insert({m.tablet_id, m.replicate_id}).second) {
      add(ViolationCode::DuplicateReplicate, std::nullopt, r, -1,
          "tablet " + std::to_string(m.tablet_id) + " replicate " + std::to_string(m.replicate_id));
    }
    auto [it, fresh] = tablet_setting.emplace(m.tablet_id, m.setting_id);
    if (!fresh && it->second != m.setting_id) {
      add(ViolationCode::BadMeta, std::nullopt, r, -1, "tablet assigned to two settings");
    }
    ++replicates_per_tablet[m.tablet_id];
    tablets_per_setting[m.setting_id].insert(m.tablet_id);
  }
  if (!replicates_per_tablet.empty()) {
    const int expected = replicates_per_tablet.begin()->second;
    for (const auto& [tablet, count] : replicates_per_tablet) {
      if (count != expected) {
        add(ViolationCode::BadMeta, std::nullopt, -1, -1,
            "tablet " + std::to_string(tablet) + " has " + std::to_string(count) +
                " replicates, expected " + std::to_string(expected));
      }
    }
  }
  if (!tablets_per_setting.empty()) {
    const std::size_t expected = tablets_per_setting.begin()->second.size();
    for (const auto& [setting, tablets] : tablets_per_setting) {
      if (tablets.size() != expected) {
        add(ViolationCode::BadMeta, std::nullopt, -1, -1,
            "setting " + std::to_string(setting) + " has " + std::to_string(tablets.size()) +
                " tablets, expected " + std::to_string(expected));
      }
    }
  }
  return report;
}

std::pair<Dataset, CleaningLog> clean(const Dataset& ds) {
  const Index n = ds.n_samples();
  if (ds.profiles.rows() != n) {
    throw StructuralMismatch("profiles have " + std::to_string(ds.profiles.rows()) +
                             " rows, metadata has " + std::to_string(n));
  }
  for (const auto& [kind, blk] : ds.blocks) {
    if (blk.values.rows() != n) {
      throw StructuralMismatch(std::string(short_name(kind)) + " has " +
                               std::to_string(blk.values.rows()) + " rows, metadata has " +
                               std::to_string(n));
    }
  }

  Dataset out = ds;
  CleaningLog log;
  for (MeasurementKind kind : kCanonicalOrder) {
    auto it = out.blocks.find(kind);
    if (it == out.blocks.end()) continue;
    Matrix& v = it->second.values;
    for (Index r = 0; r < v.rows(); ++r) {
      for (Index c = 0; c < v.cols(); ++c) {
        if (v(r, c) < 0.0) {
          log.push_back({kind, r, c, v(r, c)});
          v(r, c) = 0.0;
        }
      }
    }
  }
  // The t = 0 anchor is implicit (not stored), so it is zero by construction.
  return {std::move(out), std::move(log)};
}

std::string fingerprint(const Dataset& ds) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix_bytes = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  auto mix_int = [&](std::int64_t v) { mix_bytes(&v, sizeof v); };
  auto mix_doubles = [&](const double* p, Index count) {
    for (Index i = 0; i < count; ++i) {
      std::uint64_t bits;
      std::memcpy(&bits, p + i, sizeof bits);
      mix_bytes(&bits, sizeof bits);
    }
  };

  mix_int(ds.n_samples());
  for (const auto& [kind, blk] : ds.blocks) {
    const auto name = short_name(kind);
    mix_bytes(name.data(), name.size());
    mix_int(blk.values.rows());
    mix_int(blk.values.cols());
    mix_doubles(blk.axis.data(), blk.axis.size());
    mix_doubles(blk.values.data(), blk.values.size());
  }
  mix_doubles(ds.times.data(), ds.times.size());
  mix_int(ds.profiles.rows());
  mix_int(ds.profiles.cols());
  mix_doubles(ds.profiles.data(), ds.profiles.size());
  for (const SampleMeta& m : ds.meta) {
    mix_int(m.sample_id);
    mix_int(m.setting_id);
    mix_int(m.tablet_id);
    mix_int(m.replicate_id);
    mix_doubles(&m.dr_content, 1);
    mix_doubles(&m.hpmc_content, 1);
    mix_doubles(&m.nominal_force, 1);
  }

  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dissolve
