#include "advpad/nn/tape.hpp"

#include <cmath>

#include "advpad/error.hpp"

namespace advpad::nn {

ParamId ParameterStore::add(std::string name, Matrix init) {
  names_.push_back(std::move(name));
  values_.push_back(std::move(init));
  return ParamId{values_.size() - 1};
}

std::size_t ParameterStore::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const Matrix& m : values_) n += static_cast<std::size_t>(m.size());
  return n;
}

std::vector<double> ParameterStore::flatten() const {
  std::vector<double> flat;
  flat.reserve(scalar_count());
  for (const Matrix& m : values_) flat.insert(flat.end(), m.data(), m.data() + m.size());
  return flat;
}

void ParameterStore::assign(std::span<const double> flat) {
  if (flat.size() != scalar_count()) fail(ErrorCode::Config, "parameter vector size mismatch");
  std::size_t at = 0;
  for (Matrix& m : values_) {
    std::copy_n(flat.begin() + static_cast<long>(at), m.size(), m.data());
    at += static_cast<std::size_t>(m.size());
  }
}

Gradients::Gradients(const ParameterStore& params) {
  grads_.reserve(params.tensor_count());
  for (std::size_t i = 0; i < params.tensor_count(); ++i) {
    grads_.push_back(Matrix::Zero(params.at(i).rows(), params.at(i).cols()));
  }
}

void Gradients::zero() {
  for (Matrix& g : grads_) g.setZero();
}

void Gradients::scale(double factor) {
  for (Matrix& g : grads_) g *= factor;
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (const Matrix& g : grads_) s += g.squaredNorm();
  return s;
}

bool Gradients::all_finite() const {
  for (const Matrix& g : grads_) {
    if (!g.allFinite()) return false;
  }
  return true;
}

std::vector<double> Gradients::flatten() const {
  std::vector<double> flat;
  for (const Matrix& g : grads_) flat.insert(flat.end(), g.data(), g.data() + g.size());
  return flat;
}

Tape::Tape(const ParameterStore& params, Gradients* grads) : params_(&params), grads_(grads) {
  nodes_.reserve(64);
}

Tape::Var Tape::push(Matrix value) {
  Node node;
  if (recording()) node.grad = Matrix::Zero(value.rows(), value.cols());
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{nodes_.size() - 1};
}

Matrix& Tape::grad_of(Var v) { return nodes_[v.id].grad; }

Tape::Var Tape::constant(Matrix value) { return push(std::move(value)); }

Tape::Var Tape::embed(ParamId table, std::span<const int> ids) {
  const Matrix& t = params_->value(table);
  Matrix out(static_cast<int>(ids.size()), t.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) out.row(static_cast<int>(i)) = t.row(ids[i]);
  const Var y = push(std::move(out));
  if (recording()) {
    std::vector<int> rows(ids.begin(), ids.end());
    nodes_[y.id].backward = [this, y, table, rows = std::move(rows)] {
      Matrix& g = (*grads_)[table];
      const Matrix& dy = grad_of(y);
      for (std::size_t i = 0; i < rows.size(); ++i) g.row(rows[i]) += dy.row(static_cast<int>(i));
    };
  }
  return y;
}

Tape::Var Tape::linear(Var x, ParamId weight, ParamId bias) {
  const Matrix& w = params_->value(weight);
  const Matrix& b = params_->value(bias);
  Matrix out = value(x) * w;
  out.rowwise() += b.row(0);
  const Var y = push(std::move(out));
  if (recording()) {
    nodes_[y.id].backward = [this, x, y, weight, bias] {
      const Matrix& dy = grad_of(y);
      (*grads_)[weight].noalias() += value(x).transpose() * dy;
      (*grads_)[bias] += dy.colwise().sum();
      grad_of(x).noalias() += dy * params_->value(weight).transpose();
    };
  }
  return y;
}

Tape::Var Tape::add(Var a, Var b) {
  const Var y = push(value(a) + value(b));
  if (recording()) {
    nodes_[y.id].backward = [this, a, b, y] {
      grad_of(a) += grad_of(y);
      grad_of(b) += grad_of(y);
    };
  }
  return y;
}

namespace {
constexpr double kLayerNormEps = 1e-5;
}

Tape::Var Tape::layer_norm(Var x, ParamId gamma, ParamId beta) {
  const Matrix& in = value(x);
  const auto cols = static_cast<double>(in.cols());
  Matrix xhat(in.rows(), in.cols());
  Eigen::VectorXd inv_std(in.rows());
  for (int r = 0; r < in.rows(); ++r) {
    const double mean = in.row(r).mean();
    const double var = (in.row(r).array() - mean).square().sum() / cols;
    inv_std(r) = 1.0 / std::sqrt(var + kLayerNormEps);
    xhat.row(r) = (in.row(r).array() - mean) * inv_std(r);
  }
  const Matrix& g = params_->value(gamma);
  const Matrix& b = params_->value(beta);
  Matrix out = xhat;
  for (int r = 0; r < out.rows(); ++r) {
    out.row(r) = out.row(r).cwiseProduct(g.row(0)) + b.row(0);
  }
  const Var y = push(std::move(out));
  if (recording()) {
    nodes_[y.id].backward = [this, x, y, gamma, beta, xhat = std::move(xhat),
                             inv_std = std::move(inv_std), cols] {
      const Matrix& dy = grad_of(y);
      const Matrix& g = params_->value(gamma);
      (*grads_)[gamma] += dy.cwiseProduct(xhat).colwise().sum();
      (*grads_)[beta] += dy.colwise().sum();
      Matrix& dx = grad_of(x);
      for (int r = 0; r < dy.rows(); ++r) {
        const Eigen::RowVectorXd dxhat = dy.row(r).cwiseProduct(g.row(0));
        const double mean_d = dxhat.sum() / cols;
        const double mean_dx = dxhat.cwiseProduct(xhat.row(r)).sum() / cols;
        dx.row(r) += inv_std(r) *
                     (dxhat.array() - mean_d - xhat.row(r).array() * mean_dx).matrix();
      }
    };
  }
  return y;
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Tape::Var Tape::gelu(Var x) {
  const Matrix& in = value(x);
  Matrix out = in.unaryExpr([](double v) {
    return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v)));
  });
  const Var y = push(std::move(out));
  if (recording()) {
    nodes_[y.id].backward = [this, x, y] {
      const Matrix deriv = value(x).unaryExpr([](double v) {
        const double t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
        return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
      });
      grad_of(x) += grad_of(y).cwiseProduct(deriv);
    };
  }
  return y;
}

Tape::Var Tape::attention(Var qkv, int heads) {
  const Matrix& in = value(qkv);
  const int len = static_cast<int>(in.rows());
  const int d = static_cast<int>(in.cols() / 3);
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Matrix out(len, d);
  std::vector<Matrix> probs(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const auto q = in.middleCols(h * dh, dh);
    const auto k = in.middleCols(d + h * dh, dh);
    const auto v = in.middleCols(2 * d + h * dh, dh);
    Matrix s = (q * k.transpose()) * scale;
    for (int r = 0; r < len; ++r) {
      const double mx = s.row(r).maxCoeff();
      s.row(r) = (s.row(r).array() - mx).exp();
      s.row(r) /= s.row(r).sum();
    }
    out.middleCols(h * dh, dh).noalias() = s * v;
    probs[static_cast<std::size_t>(h)] = std::move(s);
  }
  const Var y = push(std::move(out));
  if (recording()) {
    nodes_[y.id].backward = [this, qkv, y, heads, d, dh, scale, probs = std::move(probs)] {
      const Matrix& in = value(qkv);
      const Matrix& dy = grad_of(y);
      Matrix& dqkv = grad_of(qkv);
      for (int h = 0; h < heads; ++h) {
        const Matrix& p = probs[static_cast<std::size_t>(h)];
        const auto q = in.middleCols(h * dh, dh);
        const auto k = in.middleCols(d + h * dh, dh);
        const auto v = in.middleCols(2 * d + h * dh, dh);
        const auto dout = dy.middleCols(h * dh, dh);
        dqkv.middleCols(2 * d + h * dh, dh).noalias() += p.transpose() * dout;
        const Matrix dp = dout * v.transpose();
        Matrix ds = p.cwiseProduct(dp);
        const Eigen::VectorXd row_dot = ds.rowwise().sum();
        ds -= p.cwiseProduct(row_dot.replicate(1, p.cols()));
        ds *= scale;
        dqkv.middleCols(h * dh, dh).noalias() += ds * k;
        dqkv.middleCols(d + h * dh, dh).noalias() += ds.transpose() * q;
      }
    };
  }
  return y;
}

Tape::Var Tape::concat_rows(Var top, Var bottom) {
  const Matrix& a = value(top);
  const Matrix& b = value(bottom);
  Matrix out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  const auto top_rows = a.rows();
  const Var y = push(std::move(out));
  if (recording()) {
    nodes_[y.id].backward = [this, top, bottom, y, top_rows] {
      const Matrix& dy = grad_of(y);
      grad_of(top) += dy.topRows(top_rows);
      grad_of(bottom) += dy.bottomRows(dy.rows() - top_rows);
    };
  }
  return y;
}

Tape::Var Tape::row(Var x, std::size_t index) {
  const int r = static_cast<int>(index);
  const Var y = push(value(x).row(r));
  if (recording()) {
    nodes_[y.id].backward = [this, x, y, r] { grad_of(x).row(r) += grad_of(y).row(0); };
  }
  return y;
}

Tape::Var Tape::mean_rows(Var x) {
  const Var y = push(value(x).colwise().mean());
  if (recording()) {
    nodes_[y.id].backward = [this, x, y] {
      Matrix& dx = grad_of(x);
      const double inv = 1.0 / static_cast<double>(dx.rows());
      dx.rowwise() += grad_of(y).row(0) * inv;
    };
  }
  return y;
}

void Tape::backward(Var out, const Matrix& seed) {
  if (!recording()) fail(ErrorCode::Config, "backward on a non-recording tape");
  grad_of(out) += seed;
  for (std::size_t i = out.id + 1; i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward();
  }
}

AdamW::AdamW(const ParameterStore& params, Settings settings) : settings_(settings) {
  for (std::size_t i = 0; i < params.tensor_count(); ++i) {
    m_.push_back(Matrix::Zero(params.at(i).rows(), params.at(i).cols()));
    v_.push_back(Matrix::Zero(params.at(i).rows(), params.at(i).cols()));
  }
}

void AdamW::step(ParameterStore& params, const Gradients& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(settings_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(settings_.beta2, static_cast<double>(t_));
  const double lr = settings_.learning_rate;
  for (std::size_t i = 0; i < params.tensor_count(); ++i) {
    Matrix& w = params.at(i);
    const Matrix& g = grads.at(i);
    m_[i] = settings_.beta1 * m_[i] + (1.0 - settings_.beta1) * g;
    v_[i] = settings_.beta2 * v_[i] + (1.0 - settings_.beta2) * g.cwiseProduct(g);
    w *= (1.0 - lr * settings_.weight_decay);
    w.array() -= lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + settings_.epsilon);
  }
}

Matrix random_normal(int rows, int cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

double clip_global_norm(Gradients& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (max_norm > 0.0 && norm > max_norm) grads.scale(max_norm / norm);
  return norm;
}

}  // namespace advpad::nn
