#include "biggat/model.hpp"

#include <cmath>
#include <stdexcept>

#include "biggat/rng.hpp"

namespace biggat {

Variant variant_from_string(std::string_view s) {
  if (s == "gat") return Variant::kGat;
  if (s == "bigat") return Variant::kBigat;
  if (s == "biggat") return Variant::kBiggat;
  throw std::invalid_argument("unknown variant '" + std::string(s) +
                              "' (expected gat|bigat|biggat)");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kGat: return "gat";
    case Variant::kBigat: return "bigat";
    case Variant::kBiggat: return "biggat";
  }
  return "biggat";
}

void apply_variant(ModelConfig& config, Variant v) {
  config.bimodal = v != Variant::kGat;
  config.gru = v == Variant::kBiggat;
  if (v != Variant::kBiggat) {
    config.neighborhood_order = 1;
  }
}

namespace {

// Fixed segment order; code indexes leaves by these constants.
enum SegIndex {
  kBeta1, kBeta1Bias, kBeta2, kBeta2Bias, kAttnW, kAttnA,
  kGruWz, kGruUz, kGruBz, kGruWr, kGruUr, kGruBr, kGruWh, kGruUh, kGruBh,
  kReadoutW, kReadoutB, kSegCount
};

std::vector<ParamSegment> make_layout(int m, int d) {
  std::vector<ParamSegment> seg = {
      {"beta_1", m, d, 0},      {"beta_1_bias", m, 1, 0},
      {"beta_2", m, d, 0},      {"beta_2_bias", m, 1, 0},
      {"attn_w", m, m, 0},      {"attn_a", 2 * m, 1, 0},
      {"gru_w_z", m, m, 0},     {"gru_u_z", m, m, 0},     {"gru_b_z", m, 1, 0},
      {"gru_w_r", m, m, 0},     {"gru_u_r", m, m, 0},     {"gru_b_r", m, 1, 0},
      {"gru_w_h", m, m, 0},     {"gru_u_h", m, m, 0},     {"gru_b_h", m, 1, 0},
      {"readout_w", kNumClasses, m, 0}, {"readout_b", kNumClasses, 1, 0},
  };
  int offset = 0;
  for (auto& s : seg) {
    s.offset = offset;
    offset += s.rows * s.cols;
  }
  return seg;
}

}  // namespace

ModelParams::ModelParams(int message_dim, int input_dim)
    : message_dim_(message_dim), input_dim_(input_dim) {
  if (message_dim < 1 || input_dim < 1) {
    throw std::invalid_argument("model params: dimensions must be positive");
  }
  layout_ = make_layout(message_dim, input_dim);
  const ParamSegment& last = layout_.back();
  flat_.assign(static_cast<std::size_t>(last.offset) + last.rows * last.cols, 0.0);
}

ModelParams ModelParams::glorot_init(std::uint64_t seed, int message_dim, int input_dim) {
  ModelParams p(message_dim, input_dim);
  Rng rng(seed);
  for (const ParamSegment& seg : p.layout_) {
    bool is_bias = seg.name.ends_with("_bias") || seg.name == "readout_b" ||
                   seg.name.starts_with("gru_b");
    if (is_bias) {
      continue;  // biases start at zero
    }
    // attn_a is a vector scoring a 2m concatenation: fan_in 2m, fan_out 1.
    int fan_in = seg.name == "attn_a" ? seg.rows : seg.cols;
    int fan_out = seg.name == "attn_a" ? 1 : seg.rows;
    double bound = std::sqrt(6.0 / (fan_in + fan_out));
    double* dst = p.flat_.data() + seg.offset;
    for (int i = 0; i < seg.rows * seg.cols; ++i) {
      dst[i] = rng.uniform(-bound, bound);
    }
  }
  return p;
}

std::span<double> ModelParams::segment(std::string_view name) {
  for (const ParamSegment& seg : layout_) {
    if (seg.name == name) {
      return {flat_.data() + seg.offset, static_cast<std::size_t>(seg.rows) * seg.cols};
    }
  }
  throw std::invalid_argument("model params: no segment named '" + std::string(name) + "'");
}

std::span<const double> ModelParams::segment(std::string_view name) const {
  return const_cast<ModelParams*>(this)->segment(name);
}

Neighborhoods build_neighborhoods(const Graph& g, int order) {
  Neighborhoods h;
  h.order = order;
  h.nbr = neighborhood_sets(g, order, /*include_self=*/true);
  return h;
}

BoundParams bind_params(Tape& tape, const ModelParams& params) {
  BoundParams bound;
  bound.leaves.reserve(params.layout().size());
  for (const ParamSegment& seg : params.layout()) {
    std::span<const double> data{params.flat().data() + seg.offset,
                                 static_cast<std::size_t>(seg.rows) * seg.cols};
    bound.leaves.push_back(tape.leaf(seg.rows, seg.cols, data));
  }
  return bound;
}

void accumulate_param_grads(const Tape& tape, const BoundParams& bound,
                            std::span<double> grad_out) {
  std::size_t pos = 0;
  for (const Value& leaf : bound.leaves) {
    std::span<const double> g = tape.grad(leaf);
    if (pos + g.size() > grad_out.size()) {
      throw std::invalid_argument("accumulate_param_grads: output too small");
    }
    for (double gi : g) {
      grad_out[pos++] += gi;
    }
  }
}

std::vector<Value> forward_on_tape(Tape& tape, const BoundParams& bound,
                                   const ModelConfig& config, const Mat& features,
                                   const std::vector<int>& clusters,
                                   const Neighborhoods& hoods) {
  const int n = features.rows;
  if (features.cols != config.input_dim) {
    throw std::invalid_argument("forward: feature width != input_dim");
  }
  if (static_cast<int>(clusters.size()) != n ||
      static_cast<int>(hoods.nbr.size()) != n) {
    throw std::invalid_argument("forward: clusters/neighborhoods size mismatch");
  }
  if (config.kmax < 1) {
    throw std::invalid_argument("forward: kmax must be >= 1");
  }
  const auto& lv = bound.leaves;
  const int m = config.message_dim;

  // m_{v,0}
  std::vector<Value> msg(n);
  for (int v = 0; v < n; ++v) {
    int label = config.bimodal ? clusters[v] : 1;
    if (label != 1 && label != 2) {
      throw std::invalid_argument("forward: cluster label out of range");
    }
    Value x = tape.leaf(config.input_dim, 1, features.row(v));
    msg[v] = label == 1 ? tape.affine(lv[kBeta1], x, lv[kBeta1Bias])
                        : tape.affine(lv[kBeta2], x, lv[kBeta2Bias]);
  }

  Value a_left = tape.slice(lv[kAttnA], 0, m);
  Value a_right = tape.slice(lv[kAttnA], m, m);

  for (int k = 0; k < config.kmax; ++k) {
    // attention over N_v (self included)
    std::vector<Value> proj(n), score_left(n), score_right(n);
    for (int v = 0; v < n; ++v) {
      proj[v] = tape.matvec(lv[kAttnW], msg[v]);
      score_left[v] = tape.dot(a_left, proj[v]);
      score_right[v] = tape.dot(a_right, proj[v]);
    }
    std::vector<Value> raw;
    std::vector<std::pair<int, int>> groups(n);
    int pos = 0;
    for (int v = 0; v < n; ++v) {
      if (hoods.nbr[v].empty()) {
        throw std::invalid_argument("forward: empty neighborhood (self-loop missing)");
      }
      groups[v].first = pos;
      for (int u : hoods.nbr[v]) {
        raw.push_back(tape.add(score_left[v], score_right[u]));
        ++pos;
      }
      groups[v].second = pos;
    }
    Value scores = tape.activation(Act::kLeakyRelu, tape.concat(raw));
    Value alpha = tape.grouped_softmax(scores, groups);

    std::vector<Value> hidden(n);
    std::vector<Value> items;
    for (int v = 0; v < n; ++v) {
      Value w = tape.slice(alpha, groups[v].first, groups[v].second - groups[v].first);
      items.clear();
      for (int u : hoods.nbr[v]) {
        items.push_back(proj[u]);
      }
      hidden[v] = tape.weighted_sum(w, items);
    }

    if (config.gru) {
      for (int v = 0; v < n; ++v) {
        Value h = hidden[v];
        Value mv = msg[v];
        Value z = tape.activation(Act::kSigmoid,
                                  tape.add(tape.matvec(lv[kGruWz], h),
                                           tape.affine(lv[kGruUz], mv, lv[kGruBz])));
        Value r = tape.activation(Act::kSigmoid,
                                  tape.add(tape.matvec(lv[kGruWr], h),
                                           tape.affine(lv[kGruUr], mv, lv[kGruBr])));
        Value cand = tape.activation(
            Act::kTanh, tape.add(tape.matvec(lv[kGruWh], h),
                                 tape.affine(lv[kGruUh], tape.hadamard(r, mv),
                                             lv[kGruBh])));
        // (1 - z) (.) m + z (.) cand
        msg[v] = tape.add(mv, tape.hadamard(z, tape.sub(cand, mv)));
      }
    } else {
      // the ablations without a GRU still need a nonlinearity between layers
      for (int v = 0; v < n; ++v) {
        msg[v] = tape.activation(Act::kLeakyRelu, hidden[v]);
      }
    }
  }

  std::vector<Value> logits(n);
  for (int v = 0; v < n; ++v) {
    logits[v] = tape.affine(lv[kReadoutW], msg[v], lv[kReadoutB]);
  }
  return logits;
}

Value cross_entropy_on_tape(Tape& tape, std::span<const Value> logits,
                            const std::vector<int>& labels,
                            std::span<const double> class_weights) {
  if (logits.empty() || logits.size() != labels.size()) {
    throw std::invalid_argument("cross_entropy: logits/labels mismatch");
  }
  std::vector<Value> terms;
  terms.reserve(logits.size());
  for (std::size_t v = 0; v < logits.size(); ++v) {
    int y = labels[v];
    if (y < 0 || y >= logits[v].rows) {
      throw std::invalid_argument("cross_entropy: label out of range");
    }
    double w = class_weights.empty() ? 1.0 : class_weights[y];
    terms.push_back(tape.scale(tape.pick(tape.log_softmax(logits[v]), y), -w));
  }
  return tape.scale(tape.sum(tape.concat(terms)), 1.0 / static_cast<double>(labels.size()));
}

Mat forward(const ModelParams& params, const ModelConfig& config, const Mat& features,
            const std::vector<int>& clusters, const Neighborhoods& hoods) {
  Tape tape;
  BoundParams bound = bind_params(tape, params);
  std::vector<Value> logits =
      forward_on_tape(tape, bound, config, features, clusters, hoods);
  Mat out(features.rows, kNumClasses);
  for (int v = 0; v < features.rows; ++v) {
    std::span<const double> row = tape.value(logits[v]);
    std::copy(row.begin(), row.end(), out.row(v).begin());
  }
  return out;
}

Mat forward(const ModelParams& params, const ModelConfig& config, const Mat& features,
            const std::vector<int>& clusters, const Graph& g) {
  return forward(params, config, features, clusters,
                 build_neighborhoods(g, config.neighborhood_order));
}

Mat bimodal_embed(const ModelParams& params, const ModelConfig& config,
                  const Mat& features, const std::vector<int>& clusters) {
  Tape tape;
  BoundParams bound = bind_params(tape, params);
  const auto& lv = bound.leaves;
  Mat out(features.rows, params.message_dim());
  for (int v = 0; v < features.rows; ++v) {
    int label = config.bimodal ? clusters[v] : 1;
    if (label != 1 && label != 2) {
      throw std::invalid_argument("bimodal_embed: cluster label out of range");
    }
    Value x = tape.leaf(features.cols, 1, features.row(v));
    Value msg = label == 1 ? tape.affine(lv[kBeta1], x, lv[kBeta1Bias])
                           : tape.affine(lv[kBeta2], x, lv[kBeta2Bias]);
    std::span<const double> row = tape.value(msg);
    std::copy(row.begin(), row.end(), out.row(v).begin());
  }
  return out;
}

Mat attention_step(const ModelParams& params, const Mat& messages,
                   const Neighborhoods& hoods) {
  const int n = messages.rows;
  const int m = params.message_dim();
  if (messages.cols != m || static_cast<int>(hoods.nbr.size()) != n) {
    throw std::invalid_argument("attention_step: shape mismatch");
  }
  Tape tape;
  BoundParams bound = bind_params(tape, params);
  const auto& lv = bound.leaves;
  Value a_left = tape.slice(lv[kAttnA], 0, m);
  Value a_right = tape.slice(lv[kAttnA], m, m);

  std::vector<Value> msg(n), proj(n), sl(n), sr(n);
  for (int v = 0; v < n; ++v) {
    msg[v] = tape.leaf(m, 1, messages.row(v));
    proj[v] = tape.matvec(lv[kAttnW], msg[v]);
    sl[v] = tape.dot(a_left, proj[v]);
    sr[v] = tape.dot(a_right, proj[v]);
  }
  Mat out(n, m);
  for (int v = 0; v < n; ++v) {
    std::vector<Value> raw;
    std::vector<Value> items;
    for (int u : hoods.nbr[v]) {
      raw.push_back(tape.add(sl[v], sr[u]));
      items.push_back(proj[u]);
    }
    if (raw.empty()) {
      throw std::invalid_argument("attention_step: empty neighborhood");
    }
    std::pair<int, int> group{0, static_cast<int>(raw.size())};
    Value alpha = tape.grouped_softmax(
        tape.activation(Act::kLeakyRelu, tape.concat(raw)), {&group, 1});
    Value h = tape.weighted_sum(alpha, items);
    std::span<const double> row = tape.value(h);
    std::copy(row.begin(), row.end(), out.row(v).begin());
  }
  return out;
}

Mat gru_step(const ModelParams& params, const Mat& messages_prev, const Mat& hidden) {
  const int n = messages_prev.rows;
  const int m = params.message_dim();
  if (hidden.rows != n || messages_prev.cols != m || hidden.cols != m) {
    throw std::invalid_argument("gru_step: shape mismatch");
  }
  Tape tape;
  BoundParams bound = bind_params(tape, params);
  const auto& lv = bound.leaves;
  Mat out(n, m);
  for (int v = 0; v < n; ++v) {
    Value mv = tape.leaf(m, 1, messages_prev.row(v));
    Value h = tape.leaf(m, 1, hidden.row(v));
    Value z = tape.activation(Act::kSigmoid,
                              tape.add(tape.matvec(lv[kGruWz], h),
                                       tape.affine(lv[kGruUz], mv, lv[kGruBz])));
    Value r = tape.activation(Act::kSigmoid,
                              tape.add(tape.matvec(lv[kGruWr], h),
                                       tape.affine(lv[kGruUr], mv, lv[kGruBr])));
    Value cand = tape.activation(
        Act::kTanh, tape.add(tape.matvec(lv[kGruWh], h),
                             tape.affine(lv[kGruUh], tape.hadamard(r, mv), lv[kGruBh])));
    Value next = tape.add(mv, tape.hadamard(z, tape.sub(cand, mv)));
    std::span<const double> row = tape.value(next);
    std::copy(row.begin(), row.end(), out.row(v).begin());
  }
  return out;
}

}  // namespace biggat
