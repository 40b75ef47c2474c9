#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace advpad::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ParamId {
  std::size_t index = 0;
};

// Named parameter tensors with value semantics; models hold a store and
// refer to tensors by ParamId, so copying a model copies its weights.
class ParameterStore {
 public:
  ParamId add(std::string name, Matrix init);

  const Matrix& value(ParamId id) const { return values_[id.index]; }
  Matrix& value(ParamId id) { return values_[id.index]; }
  const Matrix& at(std::size_t i) const { return values_[i]; }
  Matrix& at(std::size_t i) { return values_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }

  std::size_t tensor_count() const noexcept { return values_.size(); }
  std::size_t scalar_count() const noexcept;

  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);

  bool operator==(const ParameterStore&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
};

class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterStore& params);

  Matrix& operator[](ParamId id) { return grads_[id.index]; }
  Matrix& at(std::size_t i) { return grads_[i]; }
  const Matrix& at(std::size_t i) const { return grads_[i]; }
  std::size_t tensor_count() const noexcept { return grads_.size(); }

  void zero();
  void scale(double factor);
  double squared_norm() const;
  bool all_finite() const;
  std::vector<double> flatten() const;

 private:
  std::vector<Matrix> grads_;
};

// Records a forward computation and replays it backwards. Parameters are read
// from a const store; when constructed with a Gradients sink the tape
// records backward closures and accumulates parameter gradients into it,
// otherwise it only evaluates (safe to use concurrently on a shared store).
class Tape {
 public:
  struct Var {
    std::size_t id = 0;
  };

  explicit Tape(const ParameterStore& params, Gradients* grads = nullptr);

  bool recording() const noexcept { return grads_ != nullptr; }
  const Matrix& value(Var v) const { return nodes_[v.id].value; }

  Var constant(Matrix value);
  // Rows of a parameter table selected by `ids`.
  Var embed(ParamId table, std::span<const int> ids);
  // x * W + b, with b a 1 x out row broadcast over rows.
  Var linear(Var x, ParamId weight, ParamId bias);
  Var add(Var a, Var b);
  Var layer_norm(Var x, ParamId gamma, ParamId beta);
  Var gelu(Var x);
  // Multi-head scaled dot-product self-attention. `qkv` is L x 3d holding
  // the query, key and value projections side by side; result is L x d.
  Var attention(Var qkv, int heads);
  Var concat_rows(Var top, Var bottom);
  Var row(Var x, std::size_t index);
  Var mean_rows(Var x);

  // Seed d(out)/d(out) with `seed` and propagate to every parameter.
  void backward(Var out, const Matrix& seed);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void()> backward;
  };

  Var push(Matrix value);
  Matrix& grad_of(Var v);

  const ParameterStore* params_;
  Gradients* grads_;
  std::vector<Node> nodes_;
};

// AdamW with decoupled weight decay.
class AdamW {
 public:
  struct Settings {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.01;
  };

  AdamW() = default;
  AdamW(const ParameterStore& params, Settings settings);

  // Descends along `grads` (callers negate for ascent).
  void step(ParameterStore& params, const Gradients& grads);
  const Settings& settings() const noexcept { return settings_; }
  long steps_taken() const noexcept { return t_; }

 private:
  Settings settings_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
};

Matrix random_normal(int rows, int cols, double stddev, std::mt19937_64& rng);

// Rescale gradients so their global L2 norm is at most `max_norm`; returns
// the pre-clip norm. max_norm <= 0 disables clipping.
double clip_global_norm(Gradients& grads, double max_norm);

}  // namespace advpad::nn
