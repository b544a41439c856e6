#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace biggat {

enum class Act { kSigmoid, kTanh, kLeakyRelu };

/// Slope of the leaky rectifier used by the attention scores.
inline constexpr double kLeakySlope = 0.2;

/// Handle to a value recorded on a Tape.
struct Value {
  int id = -1;
  int rows = 0;
  int cols = 1;
  int size() const { return rows * cols; }
};

/// Reverse-mode tape over dense vector/matrix values. Dense only, no
/// broadcasting: shape mismatches are hard failures. Data and gradients live
/// in flat arenas so reset() + rebuild allocates nothing in steady state, and
/// accumulation order is fixed by tape order, which keeps gradients
/// bit-identical across repeated runs.
class Tape {
 public:
  /// Drops all recorded nodes but keeps buffer capacity.
  void reset();

  Value leaf(int rows, int cols, std::span<const double> data);
  Value leaf_scalar(double v);

  /// W x + b with W (m x n), x (n), b (m).
  Value affine(Value W, Value x, Value b);
  /// W x without a bias term.
  Value matvec(Value W, Value x);
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value hadamard(Value a, Value b);
  /// Elementwise sigmoid / tanh / leaky_relu(0.2). Rejects non-finite inputs.
  Value activation(Act kind, Value x);
  Value concat(std::span<const Value> parts);
  Value slice(Value x, int begin, int len);
  Value dot(Value a, Value b);
  /// Softmax within each [begin, end) group of the score vector, with
  /// max-subtraction for stability. Groups must be non-empty and partition
  /// nothing beyond the score range.
  Value grouped_softmax(Value scores, std::span<const std::pair<int, int>> groups);
  /// sum_i weights[i] * items[i] for equally shaped vector items.
  Value weighted_sum(Value weights, std::span<const Value> items);
  Value log_softmax(Value x);
  /// Single coordinate as a scalar value.
  Value pick(Value x, int index);
  Value sum(Value x);
  Value scale(Value x, double c);

  /// Reverse accumulation from a scalar loss recorded on this tape.
  /// Gradients of multiply-used values are summed; leaves the loss ignores
  /// get exactly zero.
  void backward(Value loss);

  std::span<const double> value(Value v) const;
  /// Valid after backward().
  std::span<const double> grad(Value v) const;
  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    kLeaf, kAffine, kMatvec, kAdd, kSub, kHadamard, kAct, kConcat, kSlice,
    kDot, kGroupedSoftmax, kWeightedSum, kLogSoftmax, kPick, kSum, kScale
  };
  struct Node {
    Op op;
    int rows, cols;
    int off;       // offset into data_/grad_
    int args_off;  // offset into args_
    int nargs;
    int aux = 0;        // act kind / slice begin / pick index / groups offset
    int aux2 = 0;       // group count
    double auxd = 0.0;  // scale factor
  };

  Value push(Op op, int rows, int cols, std::span<const Value> args);
  void check_vector(Value v, const char* who) const;
  double* data(const Node& n) { return data_.data() + n.off; }
  const double* data(const Node& n) const { return data_.data() + n.off; }
  double* grad(const Node& n) { return grad_.data() + n.off; }

  std::vector<Node> nodes_;
  std::vector<double> data_;
  std::vector<double> grad_;
  std::vector<int> args_;
  std::vector<std::pair<int, int>> groups_;
};

/// Max relative error between analytic_grad and central finite differences of
/// f at params:  |fd - grad| / (|fd| + |grad| + 1e-12), maximized over
/// coordinates. f must be deterministic; epsilon > 0 is the half step.
double finite_diff_check(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> params,
                         std::span<const double> analytic_grad,
                         double epsilon = 1e-4);

}  // namespace biggat
