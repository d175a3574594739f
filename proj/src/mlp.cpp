#include "dissolve/mlp.hpp"

#include "dissolve/csv.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace dissolve {

namespace {

void check_shapes(const MlpModel& m, const Matrix& X) {
  if (m.weights.empty()) throw ShapeError("model has no layers");
  if (X.cols() != m.input_dim()) {
    throw ShapeError("network expects " + std::to_string(m.input_dim()) + " input columns, got " +
                     std::to_string(X.cols()));
  }
}

// Pre-activations of every layer for a batch.
std::vector<Matrix> pre_activations(const MlpModel& m, const Matrix& X) {
  std::vector<Matrix> z;
  z.reserve(m.weights.size());
  const std::size_t last = m.weights.size() - 1;
  for (std::size_t t = 0; t <= last; ++t) {
    const Matrix& input = (t == 0) ? X : z.back();
    Matrix next;
    if (t == 0) {
      next = input * m.weights[t];
    } else {
      next = input.cwiseMax(0.0) * m.weights[t];
    }
    next.rowwise() += m.biases[t].transpose();
    z.push_back(std::move(next));
  }
  return z;
}

}  // namespace

void check_config(const MlpConfig& cfg) {
  if (cfg.hidden_layers.empty()) throw BadConfig("hidden_layers must not be empty");
  for (int w : cfg.hidden_layers) {
    if (w <= 0) throw BadConfig("hidden layer widths must be positive");
  }
  if (!(cfg.l2_alpha >= 0.0)) throw BadConfig("l2_alpha must be >= 0");
  if (cfg.max_iter <= 0) throw BadConfig("max_iter must be positive");
  if (!(cfg.grad_tol > 0.0)) throw BadConfig("grad_tol must be positive");
  if (cfg.history_size <= 0) throw BadConfig("history_size must be positive");
}

Index MlpModel::n_parameters() const {
  Index total = 0;
  for (std::size_t t = 0; t < weights.size(); ++t) total += weights[t].size() + biases[t].size();
  return total;
}

MlpModel mlp_init(const MlpConfig& cfg, Index in_dim, Index out_dim) {
  check_config(cfg);
  if (in_dim < 1 || out_dim < 1) throw ShapeError("network dimensions must be >= 1");

  MlpModel m;
  m.config = cfg;
  std::mt19937_64 rng(cfg.seed);
  std::vector<Index> dims{in_dim};
  for (int w : cfg.hidden_layers) dims.push_back(w);
  dims.push_back(out_dim);

  for (std::size_t t = 0; t + 1 < dims.size(); ++t) {
    const Index fan_in = dims[t], fan_out = dims[t + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix w(fan_in, fan_out);
    for (Index c = 0; c < fan_out; ++c) {
      for (Index r = 0; r < fan_in; ++r) w(r, c) = dist(rng);
    }
    m.weights.push_back(std::move(w));
    m.biases.push_back(Vector::Zero(fan_out));
  }
  return m;
}

Matrix forward(const MlpModel& m, const Matrix& X) {
  check_shapes(m, X);
  return std::move(pre_activations(m, X).back());
}

Vector pack_parameters(const MlpModel& m) {
  Vector theta(m.n_parameters());
  Index offset = 0;
  for (std::size_t t = 0; t < m.weights.size(); ++t) {
    const Matrix& w = m.weights[t];
    theta.segment(offset, w.size()) = Eigen::Map<const Vector>(w.data(), w.size());
    offset += w.size();
    theta.segment(offset, m.biases[t].size()) = m.biases[t];
    offset += m.biases[t].size();
  }
  return theta;
}

void unpack_parameters(MlpModel& m, const Vector& theta) {
  if (theta.size() != m.n_parameters()) throw ShapeError("parameter vector has the wrong length");
  Index offset = 0;
  for (std::size_t t = 0; t < m.weights.size(); ++t) {
    Matrix& w = m.weights[t];
    Eigen::Map<Vector>(w.data(), w.size()) = theta.segment(offset, w.size());
    offset += w.size();
    m.biases[t] = theta.segment(offset, m.biases[t].size());
    offset += m.biases[t].size();
  }
}

LossGrad loss_and_grad(const MlpModel& m, const Matrix& X, const Matrix& Y) {
  check_shapes(m, X);
  if (Y.rows() != X.rows() || Y.cols() != m.output_dim()) {
    throw ShapeError("targets must be " + std::to_string(X.rows()) + " x " +
                     std::to_string(m.output_dim()));
  }
  const auto n = static_cast<double>(X.rows());
  const auto n_out = static_cast<double>(Y.cols());
  const std::vector<Matrix> z = pre_activations(m, X);

  LossGrad out;
  const Matrix residual = z.back() - Y;
  out.mse = residual.squaredNorm() / (n * n_out);
  double wsq = 0.0;
  for (const Matrix& w : m.weights) wsq += w.squaredNorm();
  out.penalty = m.config.l2_alpha * 0.5 * wsq / n;
  out.loss = out.mse + out.penalty;

  // Backward pass, filling the packed gradient layer by layer from the end.
  out.grad.resize(m.n_parameters());
  std::vector<Index> offsets(m.weights.size());
  Index offset = 0;
  for (std::size_t t = 0; t < m.weights.size(); ++t) {
    offsets[t] = offset;
    offset += m.weights[t].size() + m.biases[t].size();
  }

  Matrix delta = residual * (2.0 / (n * n_out));
  for (std::size_t t = m.weights.size(); t-- > 0;) {
    const Matrix& w = m.weights[t];
    Matrix gw = (t == 0) ? Matrix(X.transpose() * delta)
                         : Matrix(z[t - 1].cwiseMax(0.0).transpose() * delta);
    gw += (m.config.l2_alpha / n) * w;
    out.grad.segment(offsets[t], w.size()) = Eigen::Map<const Vector>(gw.data(), gw.size());
    out.grad.segment(offsets[t] + w.size(), w.cols()) = delta.colwise().sum().transpose();
    if (t > 0) {
      // ReLU subgradient is 0 at 0.
      delta = ((delta * w.transpose()).array() * (z[t - 1].array() > 0.0).cast<double>()).matrix();
    }
  }
  return out;
}

double mse(const MlpModel& m, const Matrix& X, const Matrix& Y) {
  const Matrix residual = forward(m, X) - Y;
  if (residual.rows() != Y.rows() || residual.cols() != Y.cols()) throw ShapeError("target shape");
  return residual.squaredNorm() / static_cast<double>(Y.size());
}

MlpModel train(const MlpConfig& cfg, const Matrix& X, const Matrix& Y) {
  if (X.rows() < 2) throw TooFewRows("training needs at least 2 samples");
  if (Y.rows() != X.rows()) throw ShapeError("X and Y row counts differ");
  if (!X.allFinite() || !Y.allFinite()) throw DataError("training data contains non-finite values");

  MlpModel model = mlp_init(cfg, X.cols(), Y.cols());
  for (Index c = 0; c < Y.cols(); ++c) {
    if ((Y.col(c).array() == Y(0, c)).all()) model.constant_targets.push_back(c);
  }

  MlpModel scratch = model;
  auto objective = [&](const Vector& theta, Vector& grad) {
    unpack_parameters(scratch, theta);
    LossGrad lg = loss_and_grad(scratch, X, Y);
    grad = std::move(lg.grad);
    return lg.loss;
  };

  LbfgsOptions opt;
  opt.max_iter = cfg.max_iter;
  opt.grad_tol = cfg.grad_tol;
  opt.history_size = cfg.history_size;

  Vector theta = pack_parameters(model);
  const LbfgsResult res = lbfgs_minimize<double>(objective, theta, opt);
  if (!std::isfinite(res.value)) throw NonFiniteLoss("training objective diverged");

  unpack_parameters(model, theta);
  model.initial_loss = res.initial_value;
  model.train_loss = res.value;
  model.n_iters = res.iterations;
  model.converged = res.converged();
  return model;
}

void save_mlp(const MlpModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "hidden_layers";
  for (int w : m.config.hidden_layers) out << ',' << w;
  out << '\n';
  out << "l2_alpha," << format_double(m.config.l2_alpha) << '\n';
  out << "seed," << m.config.seed << '\n';
  out << "train_loss," << format_double(m.train_loss) << '\n';
  out << "n_iters," << m.n_iters << '\n';
  out << "converged," << (m.converged ? 1 : 0) << '\n';
  for (std::size_t t = 0; t < m.weights.size(); ++t) {
    const Matrix& w = m.weights[t];
    out << "weights," << t << ',' << w.rows() << ',' << w.cols() << '\n';
    for (Index r = 0; r < w.rows(); ++r) {
      for (Index c = 0; c < w.cols(); ++c) out << (c ? "," : "") << format_double(w(r, c));
      out << '\n';
    }
    out << "bias," << t << ',' << m.biases[t].size() << '\n';
    for (Index c = 0; c < m.biases[t].size(); ++c) {
      out << (c ? "," : "") << format_double(m.biases[t][c]);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

MlpModel load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  const std::string file = path.string();
  MlpModel m;
  std::string line;
  std::size_t lineno = 0;
  auto next_fields = [&]() {
    if (!std::getline(in, line)) throw ParseError(file + ": unexpected end of file");
    ++lineno;
    return split_csv_line(line);
  };
  auto num = [&](const std::string& s, std::size_t col) {
    return parse_double(s, file, lineno, col);
  };

  auto header = next_fields();
  if (header.empty() || header[0] != "hidden_layers") throw ParseError(file + ": missing hidden_layers");
  m.config.hidden_layers.clear();
  for (std::size_t i = 1; i < header.size(); ++i) {
    m.config.hidden_layers.push_back(static_cast<int>(num(header[i], i)));
  }
  m.config.l2_alpha = num(next_fields().at(1), 1);
  m.config.seed = std::stoull(next_fields().at(1));
  m.train_loss = num(next_fields().at(1), 1);
  m.n_iters = static_cast<int>(num(next_fields().at(1), 1));
  m.converged = num(next_fields().at(1), 1) != 0.0;

  const std::size_t layers = m.config.hidden_layers.size() + 1;
  for (std::size_t t = 0; t < layers; ++t) {
    auto wh = next_fields();
    if (wh.size() != 4 || wh[0] != "weights") throw ParseError(file + ": expected weights header");
    const auto rows = static_cast<Index>(num(wh[2], 2));
    const auto cols = static_cast<Index>(num(wh[3], 3));
    Matrix w(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      auto f = next_fields();
      if (static_cast<Index>(f.size()) != cols) throw ParseError(file + ": weight row width");
      for (Index c = 0; c < cols; ++c) w(r, c) = num(f[static_cast<std::size_t>(c)], static_cast<std::size_t>(c));
    }
    auto bh = next_fields();
    if (bh.size() != 3 || bh[0] != "bias") throw ParseError(file + ": expected bias header");
    auto bf = next_fields();
    if (static_cast<Index>(bf.size()) != cols) throw ParseError(file + ": bias width");
    Vector b(cols);
    for (Index c = 0; c < cols; ++c) b[c] = num(bf[static_cast<std::size_t>(c)], static_cast<std::size_t>(c));
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
  }
  return m;
}

}  // namespace dissolve
