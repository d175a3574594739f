#include "dissolve/synthdata.hpp"

#include "dissolve/csv.hpp"
#include "dissolve/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace dissolve {

namespace {

constexpr double kPi = std::numbers::pi;

struct Latents {
  double dr = 0.0;
  double hpmc = 0.0;
  double force = 0.0;
};

std::pair<double, double> axis_range(MeasurementKind kind, Index n) {
  switch (kind) {
    case MeasurementKind::NirReflection: return {4000.0, 10000.0};
    case MeasurementKind::NirTransmission: return {4000.0, 15000.0};
    case MeasurementKind::RamanReflection:
    case MeasurementKind::RamanTransmission: return {200.0, 1890.0};
    case MeasurementKind::CompressionForce: return {0.0, static_cast<double>(n - 1)};
  }
  return {0.0, 1.0};
}

// Nuisance factor count of an uninformative spectral channel. Raman
// transmission is dominated by a single factor.
int nuisance_factors(MeasurementKind kind) {
  return kind == MeasurementKind::RamanTransmission ? 1 : 2;
}

std::uint64_t kind_key(MeasurementKind kind) { return static_cast<std::uint64_t>(kind); }

// Broad peaks on a positive floor, so every grid point carries signal.
Matrix make_templates(const Vector& axis, int count, std::mt19937_64& rng) {
  const double lo = axis.minCoeff();
  const double span = std::max(axis.maxCoeff() - lo, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix t(axis.size(), count);
  for (int a = 0; a < count; ++a) {
    const double floor = 0.1 + 0.1 * unit(rng);
    t.col(a).setConstant(floor);
    for (int p = 0; p < 4; ++p) {
      const double centre = lo + span * unit(rng);
      const double width = span * (0.05 + 0.10 * unit(rng));
      const double amp = 0.3 + 0.7 * unit(rng);
      for (Index j = 0; j < axis.size(); ++j) {
        const double z = (axis[j] - centre) / width;
        t(j, a) += amp * std::exp(-0.5 * z * z);
      }
    }
  }
  return t;
}

// Compact sin^2 bump on [a, b] of the normalized position x in [0, 1].
double bump(double x, double a, double b) {
  if (x <= a || x >= b) return 0.0;
  const double s = std::sin(kPi * (x - a) / (b - a));
  return s * s;
}

Vector compression_pulse(Index n) {
  Vector v(n);
  for (Index j = 0; j < n; ++j) {
    const double x = n > 1 ? static_cast<double>(j) / static_cast<double>(n - 1) : 0.5;
    v[j] = bump(x, 0.15, 0.65);
  }
  return v;
}

// Elastic-recovery shoulder after the force peak.
Vector compression_relaxation(Index n) {
  Vector v(n);
  for (Index j = 0; j < n; ++j) {
    const double x = n > 1 ? static_cast<double>(j) / static_cast<double>(n - 1) : 0.5;
    v[j] = bump(x, 0.40, 0.90) * (1.0 - 0.5 * x);
  }
  return v;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

Index GeneratorConfig::feature_count(MeasurementKind kind) const {
  auto it = features.find(kind);
  return it == features.end() ? default_feature_count(kind) : it->second;
}

double GeneratorConfig::noise(MeasurementKind kind) const {
  auto it = noise_sd.find(kind);
  return it == noise_sd.end() ? default_noise_sd : it->second;
}

GeneratorConfig preset_config(Preset preset) {
  GeneratorConfig cfg;
  switch (preset) {
    case Preset::Paper:
      break;
    case Preset::Small:
      for (MeasurementKind k : kCanonicalOrder) cfg.features[k] = 64;
      break;
    case Preset::Test:
      cfg.n_settings = 5;
      for (MeasurementKind k : kCanonicalOrder) cfg.features[k] = 16;
      break;
  }
  return cfg;
}

std::optional<Preset> parse_preset(std::string_view name) {
  if (name == "paper") return Preset::Paper;
  if (name == "small") return Preset::Small;
  if (name == "test") return Preset::Test;
  return std::nullopt;
}

void check_config(const GeneratorConfig& cfg) {
  if (cfg.n_settings < 1 || cfg.n_settings > 37) throw BadConfig("n_settings must lie in [1, 37]");
  if (cfg.tablets_per_setting < 1) throw BadConfig("tablets_per_setting must be >= 1");
  if (cfg.replicates < 1 || cfg.replicates > 2) throw BadConfig("replicates must be 1 or 2");
  for (MeasurementKind k : kCanonicalOrder) {
    if (cfg.feature_count(k) < 1) {
      throw BadConfig("feature count of " + std::string(short_name(k)) + " must be >= 1");
    }
    if (!(cfg.noise(k) >= 0.0)) {
      throw BadConfig("noise_sd of " + std::string(short_name(k)) + " must be >= 0");
    }
  }
  if (!(cfg.tablet_jitter_sd >= 0.0) || !(cfg.sampling_error_sd >= 0.0)) {
    throw BadConfig("jitter and sampling error must be >= 0");
  }
  if (!(cfg.tau_min > 0.0 && cfg.tau_max >= cfg.tau_min)) throw BadConfig("need 0 < tau_min <= tau_max");
  if (!(cfg.beta_min > 0.0 && cfg.beta_max >= cfg.beta_min)) {
    throw BadConfig("need 0 < beta_min <= beta_max");
  }
}

void apply_generator_section(GeneratorConfig& cfg, const KeyValueSection& section) {
  auto number = [&](const std::string& key, const std::string& value) {
    try {
      return parse_double(value, "[generator]", 0, 0);
    } catch (const ParseError&) {
      throw BadConfig("[generator] " + key + ": not a number: '" + value + "'");
    }
  };
  auto integer = [&](const std::string& key, const std::string& value) {
    const double v = number(key, value);
    if (v != std::floor(v)) throw BadConfig("[generator] " + key + ": expected an integer");
    return static_cast<int>(v);
  };
  auto kind_of = [](const std::string& key, const std::string& name) {
    auto k = parse_kind(name);
    if (!k) throw BadConfig("[generator] " + key + ": unknown channel '" + name + "'");
    return *k;
  };

  for (const auto& [key, value] : section.entries) {
    if (key == "n_settings") {
      cfg.n_settings = integer(key, value);
    } else if (key == "tablets_per_setting") {
      cfg.tablets_per_setting = integer(key, value);
    } else if (key == "replicates") {
      cfg.replicates = integer(key, value);
    } else if (key == "grid_size") {
      for (MeasurementKind k : kCanonicalOrder) {
        if (k != MeasurementKind::CompressionForce) cfg.features[k] = integer(key, value);
      }
    } else if (key == "compression_points") {
      cfg.features[MeasurementKind::CompressionForce] = integer(key, value);
    } else if (key.rfind("features.", 0) == 0) {
      cfg.features[kind_of(key, key.substr(9))] = integer(key, value);
    } else if (key == "informative") {
      cfg.informative.clear();
      for (const auto& name : split_csv_line(value)) {
        const std::string n(trim(name));
        if (!n.empty()) cfg.informative.insert(kind_of(key, n));
      }
    } else if (key == "noise_sd") {
      cfg.default_noise_sd = number(key, value);
    } else if (key.rfind("noise_sd.", 0) == 0) {
      cfg.noise_sd[kind_of(key, key.substr(9))] = number(key, value);
    } else if (key == "tablet_jitter_sd") {
      cfg.tablet_jitter_sd = number(key, value);
    } else if (key == "sampling_error_sd") {
      cfg.sampling_error_sd = number(key, value);
    } else if (key == "tau_min") {
      cfg.tau_min = number(key, value);
    } else if (key == "tau_max") {
      cfg.tau_max = number(key, value);
    } else if (key == "beta_min") {
      cfg.beta_min = number(key, value);
    } else if (key == "beta_max") {
      cfg.beta_max = number(key, value);
    } else {
      throw BadConfig("[generator] unknown key '" + key + "'");
    }
  }
}

Vector weibull_release(const Vector& times, double tau, double beta) {
  return (100.0 * (1.0 - (-(times.array() / tau).pow(beta)).exp())).matrix();
}

GeneratedData generate_with_truth(const GeneratorConfig& cfg) {
  check_config(cfg);
  const Index n_tablets = static_cast<Index>(cfg.n_settings) * cfg.tablets_per_setting;
  const Index n = n_tablets * cfg.replicates;

  // Nominal setting levels on a 1/20 grid.
  std::vector<Latents> nominal(static_cast<std::size_t>(cfg.n_settings));
  for (int s = 0; s < cfg.n_settings; ++s) {
    std::mt19937_64 rng(derive_seed(cfg.seed, {4000, static_cast<std::uint64_t>(s)}));
    std::uniform_int_distribution<int> level(0, 20);
    nominal[static_cast<std::size_t>(s)] = {level(rng) / 20.0, level(rng) / 20.0, level(rng) / 20.0};
  }

  // Tablet-level latents.
  std::vector<Latents> tablet(static_cast<std::size_t>(n_tablets));
  for (Index t = 0; t < n_tablets; ++t) {
    std::mt19937_64 rng(derive_seed(cfg.seed, {5000, static_cast<std::uint64_t>(t)}));
    std::normal_distribution<double> jitter(0.0, cfg.tablet_jitter_sd);
    const Latents& nom = nominal[static_cast<std::size_t>(t / cfg.tablets_per_setting)];
    tablet[static_cast<std::size_t>(t)] = {clamp01(nom.dr + jitter(rng)),
                                           clamp01(nom.hpmc + jitter(rng)),
                                           clamp01(nom.force + jitter(rng))};
  }

  GeneratedData out;
  Dataset& ds = out.dataset;
  ds.name = "synthetic-" + std::to_string(cfg.seed);
  ds.times = time_grid();
  ds.profiles.resize(n, kTimePoints);
  out.truth.tau.resize(n);
  out.truth.beta.resize(n);

  for (Index t = 0; t < n_tablets; ++t) {
    const Latents& lat = tablet[static_cast<std::size_t>(t)];
    const int setting = static_cast<int>(t / cfg.tablets_per_setting);
    const Latents& nom = nominal[static_cast<std::size_t>(setting)];
    const double tau = cfg.tau_min + (cfg.tau_max - cfg.tau_min) * (0.55 * lat.hpmc + 0.45 * lat.force);
    const double beta = cfg.beta_min + (cfg.beta_max - cfg.beta_min) * lat.dr;
    const Vector profile = weibull_release(ds.times, tau, beta);
    for (int r = 0; r < cfg.replicates; ++r) {
      const Index row = t * cfg.replicates + r;
      ds.profiles.row(row) = profile.transpose();
      out.truth.tau[row] = tau;
      out.truth.beta[row] = beta;
      SampleMeta m;
      m.sample_id = row + 1;
      m.setting_id = setting + 1;
      m.tablet_id = t + 1;
      m.replicate_id = r + 1;
      m.dr_content = 60.0 + 40.0 * nom.dr;
      m.hpmc_content = 10.0 + 30.0 * nom.hpmc;
      m.nominal_force = 5.0 + 20.0 * nom.force;
      ds.meta.push_back(m);
    }
  }

  for (MeasurementKind kind : kCanonicalOrder) {
    const Index width = cfg.feature_count(kind);
    const bool informative = cfg.informative.count(kind) != 0;
    const double noise_sd = cfg.noise(kind);
    const auto [lo, hi] = axis_range(kind, width);
    SpectralBlock blk;
    blk.kind = kind;
    blk.axis = width > 1 ? Vector(Vector::LinSpaced(width, lo, hi)) : Vector(Vector::Constant(1, lo));
    blk.values.resize(n, width);

    const bool force_curve = kind == MeasurementKind::CompressionForce;
    Matrix templates;
    Vector pulse, relax;
    if (force_curve) {
      pulse = compression_pulse(width);
      relax = compression_relaxation(width);
    } else {
      std::mt19937_64 trng(derive_seed(cfg.seed, {3000, kind_key(kind)}));
      templates = make_templates(blk.axis, informative ? 3 : nuisance_factors(kind), trng);
    }

    for (Index t = 0; t < n_tablets; ++t) {
      // What this channel sees of the tablet: latents plus a sampling error,
      // or nuisance levels unrelated to the latents.
      std::mt19937_64 trng(derive_seed(cfg.seed, {1000, kind_key(kind), static_cast<std::uint64_t>(t)}));
      std::normal_distribution<double> err(0.0, cfg.sampling_error_sd);
      std::normal_distribution<double> std_normal(0.0, 1.0);
      const Latents& lat = tablet[static_cast<std::size_t>(t)];
      Vector signal;
      if (force_curve) {
        double peak, shoulder;
        if (informative) {
          peak = 5.0 + 20.0 * (lat.force + err(trng));
          shoulder = 1.0 + 2.0 * (lat.hpmc + err(trng));
        } else {
          peak = 15.0 + 4.0 * std_normal(trng);
          shoulder = 2.0 + 0.5 * std_normal(trng);
        }
        signal = peak * pulse + shoulder * relax;
      } else {
        Vector w(templates.cols());
        if (informative) {
          w << 0.2 + lat.dr + err(trng), 0.2 + lat.hpmc + err(trng),
              0.2 + 0.5 * (lat.force + err(trng));
        } else {
          for (Index a = 0; a < w.size(); ++a) w[a] = 0.6 + 0.3 * std_normal(trng);
        }
        signal = Vector::Constant(width, 0.5) + templates * w;
      }

      for (int r = 0; r < cfg.replicates; ++r) {
        const Index row = t * cfg.replicates + r;
        std::mt19937_64 nrng(derive_seed(cfg.seed, {2000, kind_key(kind), static_cast<std::uint64_t>(row)}));
        std::normal_distribution<double> noise(0.0, 1.0);
        for (Index j = 0; j < width; ++j) {
          // Force noise is proportional so flat tails stay flat.
          const double e = noise_sd > 0.0 ? noise_sd * noise(nrng) : 0.0;
          const double v = force_curve ? signal[j] * (1.0 + e) : signal[j] + e;
          blk.values(row, j) = std::max(v, 0.0);
        }
      }
    }
    ds.blocks.emplace(kind, std::move(blk));
  }
  return out;
}

Dataset generate(const GeneratorConfig& cfg) { return generate_with_truth(cfg).dataset; }

}  // namespace dissolve
