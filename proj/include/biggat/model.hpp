#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biggat/autodiff.hpp"
#include "biggat/graph.hpp"
#include "biggat/matrix.hpp"

namespace biggat {

inline constexpr int kNumClasses = 3;

/// Architecture switches. Variant semantics:
///   GAT    = bimodal off, gru off, neighborhood order 1
///   BiGAT  = bimodal on,  gru off, neighborhood order 1
///   BiGGAT = bimodal on,  gru on,  order selected per event
struct ModelConfig {
  int kmax = 2;
  int neighborhood_order = 1;
  bool bimodal = true;
  bool gru = true;
  int message_dim = 3;
  int input_dim = 11;
};

enum class Variant { kGat, kBigat, kBiggat };

Variant variant_from_string(std::string_view s);
std::string to_string(Variant v);
/// Applies the variant switches to a config (leaves kmax and dims alone).
void apply_variant(ModelConfig& config, Variant v);

struct ParamSegment {
  std::string name;
  int rows = 0;
  int cols = 0;
  int offset = 0;
};

/// All learnable weights in one flat vector with a named segment layout:
/// two embedding matrices with biases, attention weights, six GRU matrices
/// with three gate biases, and the linear readout. The flat view is what the
/// optimizer, the gradient check, and serialization operate on.
class ModelParams {
 public:
  explicit ModelParams(int message_dim = 3, int input_dim = 11);

  /// Glorot-uniform matrices, zero biases; deterministic per seed.
  static ModelParams glorot_init(std::uint64_t seed, int message_dim = 3,
                                 int input_dim = 11);

  int message_dim() const { return message_dim_; }
  int input_dim() const { return input_dim_; }
  int total_size() const { return static_cast<int>(flat_.size()); }

  std::vector<double>& flat() { return flat_; }
  const std::vector<double>& flat() const { return flat_; }
  const std::vector<ParamSegment>& layout() const { return layout_; }

  std::span<double> segment(std::string_view name);
  std::span<const double> segment(std::string_view name) const;

 private:
  int message_dim_;
  int input_dim_;
  std::vector<ParamSegment> layout_;
  std::vector<double> flat_;
};

/// Per-node neighbor lists (self included, sorted) at a fixed hop order,
/// precomputed once per event.
struct Neighborhoods {
  int order = 1;
  std::vector<std::vector<int>> nbr;
};

Neighborhoods build_neighborhoods(const Graph& g, int order);

/// Parameter leaves on a tape, parallel to ModelParams::layout().
struct BoundParams {
  std::vector<Value> leaves;
};

BoundParams bind_params(Tape& tape, const ModelParams& params);

/// Adds each segment leaf's gradient into the flat gradient vector.
void accumulate_param_grads(const Tape& tape, const BoundParams& bound,
                            std::span<double> grad_out);

/// Records the full model on the tape and returns per-node logit values.
/// clusters holds labels in {1, 2}; features are the (scaled) N x input_dim
/// rows; neighborhoods must include self-loops.
std::vector<Value> forward_on_tape(Tape& tape, const BoundParams& bound,
                                   const ModelConfig& config, const Mat& features,
                                   const std::vector<int>& clusters,
                                   const Neighborhoods& hoods);

/// Mean over nodes of -w_y * log softmax(logits)_y. class_weights may be
/// empty (all ones) or one weight per class.
Value cross_entropy_on_tape(Tape& tape, std::span<const Value> logits,
                            const std::vector<int>& labels,
                            std::span<const double> class_weights = {});

/// Plain N x 3 logits; builds neighborhoods from config.neighborhood_order.
Mat forward(const ModelParams& params, const ModelConfig& config, const Mat& features,
            const std::vector<int>& clusters, const Graph& g);
Mat forward(const ModelParams& params, const ModelConfig& config, const Mat& features,
            const std::vector<int>& clusters, const Neighborhoods& hoods);

/// Initial messages m_{v,0}: the cluster label picks which embedding matrix
/// maps the node's features. With bimodal off, every node uses beta_1.
Mat bimodal_embed(const ModelParams& params, const ModelConfig& config,
                  const Mat& features, const std::vector<int>& clusters);

/// One attention aggregation over the given neighborhoods (no output
/// nonlinearity).
Mat attention_step(const ModelParams& params, const Mat& messages,
                   const Neighborhoods& hoods);

/// One GRU update blending previous messages with attention output.
Mat gru_step(const ModelParams& params, const Mat& messages_prev, const Mat& hidden);

}  // namespace biggat
