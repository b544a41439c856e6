#include "biggat/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace biggat {

void Tape::reset() {
  nodes_.clear();
  data_.clear();
  grad_.clear();
  args_.clear();
  groups_.clear();
}

Value Tape::push(Op op, int rows, int cols, std::span<const Value> args) {
  Node n;
  n.op = op;
  n.rows = rows;
  n.cols = cols;
  n.off = static_cast<int>(data_.size());
  n.args_off = static_cast<int>(args_.size());
  n.nargs = static_cast<int>(args.size());
  for (const Value& a : args) {
    if (a.id < 0 || a.id >= static_cast<int>(nodes_.size())) {
      throw std::invalid_argument("tape: argument value is not on this tape");
    }
    args_.push_back(a.id);
  }
  data_.resize(data_.size() + static_cast<std::size_t>(rows) * cols, 0.0);
  nodes_.push_back(n);
  return Value{static_cast<int>(nodes_.size()) - 1, rows, cols};
}

void Tape::check_vector(Value v, const char* who) const {
  if (v.cols != 1) {
    throw std::invalid_argument(std::string(who) + ": expected a vector value");
  }
}

Value Tape::leaf(int rows, int cols, std::span<const double> init) {
  if (init.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("leaf: data size does not match shape");
  }
  Value v = push(Op::kLeaf, rows, cols, {});
  std::copy(init.begin(), init.end(), data(nodes_.back()));
  return v;
}

Value Tape::leaf_scalar(double x) { return leaf(1, 1, std::span<const double>(&x, 1)); }

Value Tape::affine(Value W, Value x, Value b) {
  check_vector(x, "affine");
  check_vector(b, "affine");
  if (W.cols != x.rows || W.rows != b.rows) {
    throw std::invalid_argument("affine: shape mismatch");
  }
  Value args[] = {W, x, b};
  Value y = push(Op::kAffine, W.rows, 1, args);
  const double* w = data(nodes_[W.id]);
  const double* xv = data(nodes_[x.id]);
  const double* bv = data(nodes_[b.id]);
  double* out = data(nodes_.back());
  for (int i = 0; i < W.rows; ++i) {
    double s = bv[i];
    const double* wrow = w + static_cast<std::size_t>(i) * W.cols;
    for (int j = 0; j < W.cols; ++j) {
      s += wrow[j] * xv[j];
    }
    out[i] = s;
  }
  return y;
}

Value Tape::matvec(Value W, Value x) {
  check_vector(x, "matvec");
  if (W.cols != x.rows) {
    throw std::invalid_argument("matvec: shape mismatch");
  }
  Value args[] = {W, x};
  Value y = push(Op::kMatvec, W.rows, 1, args);
  const double* w = data(nodes_[W.id]);
  const double* xv = data(nodes_[x.id]);
  double* out = data(nodes_.back());
  for (int i = 0; i < W.rows; ++i) {
    double s = 0.0;
    const double* wrow = w + static_cast<std::size_t>(i) * W.cols;
    for (int j = 0; j < W.cols; ++j) {
      s += wrow[j] * xv[j];
    }
    out[i] = s;
  }
  return y;
}

Value Tape::add(Value a, Value b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw std::invalid_argument("add: shape mismatch");
  }
  Value args[] = {a, b};
  Value y = push(Op::kAdd, a.rows, a.cols, args);
  const double* av = data(nodes_[a.id]);
  const double* bv = data(nodes_[b.id]);
  double* out = data(nodes_.back());
  for (int i = 0; i < a.size(); ++i) {
    out[i] = av[i] + bv[i];
  }
  return y;
}

Value Tape::sub(Value a, Value b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw std::invalid_argument("sub: shape mismatch");
  }
  Value args[] = {a, b};
  Value y = push(Op::kSub, a.rows, a.cols, args);
  const double* av = data(nodes_[a.id]);
  const double* bv = data(nodes_[b.id]);
  double* out = data(nodes_.back());
  for (int i = 0; i < a.size(); ++i) {
    out[i] = av[i] - bv[i];
  }
  return y;
}

Value Tape::hadamard(Value a, Value b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw std::invalid_argument("hadamard: shape mismatch");
  }
  Value args[] = {a, b};
  Value y = push(Op::kHadamard, a.rows, a.cols, args);
  const double* av = data(nodes_[a.id]);
  const double* bv = data(nodes_[b.id]);
  double* out = data(nodes_.back());
  for (int i = 0; i < a.size(); ++i) {
    out[i] = av[i] * bv[i];
  }
  return y;
}

Value Tape::activation(Act kind, Value x) {
  Value args[] = {x};
  Value y = push(Op::kAct, x.rows, x.cols, args);
  nodes_.back().aux = static_cast<int>(kind);
  const double* xv = data(nodes_[x.id]);
  double* out = data(nodes_.back());
  for (int i = 0; i < x.size(); ++i) {
    if (!std::isfinite(xv[i])) {
      throw std::invalid_argument("activation: non-finite input");
    }
    switch (kind) {
      case Act::kSigmoid:
        out[i] = 1.0 / (1.0 + std::exp(-xv[i]));
        break;
      case Act::kTanh:
        out[i] = std::tanh(xv[i]);
        break;
      case Act::kLeakyRelu:
        out[i] = xv[i] >= 0.0 ? xv[i] : kLeakySlope * xv[i];
        break;
    }
  }
  return y;
}

Value Tape::concat(std::span<const Value> parts) {
  if (parts.empty()) {
    throw std::invalid_argument("concat: no parts");
  }
  int total = 0;
  for (const Value& p : parts) {
    check_vector(p, "concat");
    total += p.rows;
  }
  Value y = push(Op::kConcat, total, 1, parts);
  double* out = data(nodes_.back());
  for (const Value& p : parts) {
    const double* pv = data(nodes_[p.id]);
    out = std::copy(pv, pv + p.rows, out);
  }
  return y;
}

Value Tape::slice(Value x, int begin, int len) {
  check_vector(x, "slice");
  if (begin < 0 || len < 1 || begin + len > x.rows) {
    throw std::invalid_argument("slice: range out of bounds");
  }
  Value args[] = {x};
  Value y = push(Op::kSlice, len, 1, args);
  nodes_.back().aux = begin;
  const double* xv = data(nodes_[x.id]);
  std::copy(xv + begin, xv + begin + len, data(nodes_.back()));
  return y;
}

Value Tape::dot(Value a, Value b) {
  check_vector(a, "dot");
  check_vector(b, "dot");
  if (a.rows != b.rows) {
    throw std::invalid_argument("dot: shape mismatch");
  }
  Value args[] = {a, b};
  Value y = push(Op::kDot, 1, 1, args);
  const double* av = data(nodes_[a.id]);
  const double* bv = data(nodes_[b.id]);
  double s = 0.0;
  for (int i = 0; i < a.rows; ++i) {
    s += av[i] * bv[i];
  }
  *data(nodes_.back()) = s;
  return y;
}

Value Tape::grouped_softmax(Value scores, std::span<const std::pair<int, int>> groups) {
  check_vector(scores, "grouped_softmax");
  for (const auto& [b, e] : groups) {
    if (b >= e) {
      throw std::invalid_argument("grouped_softmax: empty group");
    }
    if (b < 0 || e > scores.rows) {
      throw std::invalid_argument("grouped_softmax: group out of range");
    }
  }
  Value args[] = {scores};
  Value y = push(Op::kGroupedSoftmax, scores.rows, 1, args);
  nodes_.back().aux = static_cast<int>(groups_.size());
  nodes_.back().aux2 = static_cast<int>(groups.size());
  groups_.insert(groups_.end(), groups.begin(), groups.end());
  const double* s = data(nodes_[scores.id]);
  double* out = data(nodes_.back());
  for (const auto& [b, e] : groups) {
    double m = s[b];
    for (int i = b + 1; i < e; ++i) {
      m = std::max(m, s[i]);
    }
    double z = 0.0;
    for (int i = b; i < e; ++i) {
      out[i] = std::exp(s[i] - m);
      z += out[i];
    }
    for (int i = b; i < e; ++i) {
      out[i] /= z;
    }
  }
  return y;
}

Value Tape::weighted_sum(Value weights, std::span<const Value> items) {
  check_vector(weights, "weighted_sum");
  if (items.empty() || weights.rows != static_cast<int>(items.size())) {
    throw std::invalid_argument("weighted_sum: weight count does not match item count");
  }
  int dim = items[0].rows;
  for (const Value& it : items) {
    check_vector(it, "weighted_sum");
    if (it.rows != dim) {
      throw std::invalid_argument("weighted_sum: item shape mismatch");
    }
  }
  std::vector<Value> args;
  args.reserve(items.size() + 1);
  args.push_back(weights);
  args.insert(args.end(), items.begin(), items.end());
  Value y = push(Op::kWeightedSum, dim, 1, args);
  const double* w = data(nodes_[weights.id]);
  double* out = data(nodes_.back());
  for (std::size_t k = 0; k < items.size(); ++k) {
    const double* iv = data(nodes_[items[k].id]);
    for (int i = 0; i < dim; ++i) {
      out[i] += w[k] * iv[i];
    }
  }
  return y;
}

Value Tape::log_softmax(Value x) {
  check_vector(x, "log_softmax");
  Value args[] = {x};
  Value y = push(Op::kLogSoftmax, x.rows, 1, args);
  const double* xv = data(nodes_[x.id]);
  double* out = data(nodes_.back());
  double m = xv[0];
  for (int i = 1; i < x.rows; ++i) {
    m = std::max(m, xv[i]);
  }
  double z = 0.0;
  for (int i = 0; i < x.rows; ++i) {
    z += std::exp(xv[i] - m);
  }
  double lse = m + std::log(z);
  for (int i = 0; i < x.rows; ++i) {
    out[i] = xv[i] - lse;
  }
  return y;
}

Value Tape::pick(Value x, int index) {
  check_vector(x, "pick");
  if (index < 0 || index >= x.rows) {
    throw std::invalid_argument("pick: index out of range");
  }
  Value args[] = {x};
  Value y = push(Op::kPick, 1, 1, args);
  nodes_.back().aux = index;
  *data(nodes_.back()) = data(nodes_[x.id])[index];
  return y;
}

Value Tape::sum(Value x) {
  Value args[] = {x};
  Value y = push(Op::kSum, 1, 1, args);
  const double* xv = data(nodes_[x.id]);
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    s += xv[i];
  }
  *data(nodes_.back()) = s;
  return y;
}

Value Tape::scale(Value x, double c) {
  Value args[] = {x};
  Value y = push(Op::kScale, x.rows, x.cols, args);
  nodes_.back().auxd = c;
  const double* xv = data(nodes_[x.id]);
  double* out = data(nodes_.back());
  for (int i = 0; i < x.size(); ++i) {
    out[i] = c * xv[i];
  }
  return y;
}

std::span<const double> Tape::value(Value v) const {
  const Node& n = nodes_.at(v.id);
  return {data(n), static_cast<std::size_t>(n.rows) * n.cols};
}

std::span<const double> Tape::grad(Value v) const {
  const Node& n = nodes_.at(v.id);
  return {grad_.data() + n.off, static_cast<std::size_t>(n.rows) * n.cols};
}

void Tape::backward(Value loss) {
  if (loss.id < 0 || loss.id >= static_cast<int>(nodes_.size())) {
    throw std::invalid_argument("backward: loss is not on this tape");
  }
  if (nodes_[loss.id].rows != 1 || nodes_[loss.id].cols != 1) {
    throw std::invalid_argument("backward: loss must be scalar");
  }
  grad_.assign(data_.size(), 0.0);
  grad_[nodes_[loss.id].off] = 1.0;

  for (int idx = loss.id; idx >= 0; --idx) {
    const Node& n = nodes_[idx];
    const double* g = grad_.data() + n.off;
    const int* args = args_.data() + n.args_off;
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kAffine: {
        const Node& W = nodes_[args[0]];
        const Node& x = nodes_[args[1]];
        const Node& b = nodes_[args[2]];
        double* gw = grad(W);
        double* gx = grad(x);
        double* gb = grad(b);
        const double* wv = data(W);
        const double* xv = data(x);
        for (int i = 0; i < W.rows; ++i) {
          gb[i] += g[i];
          double* gwrow = gw + static_cast<std::size_t>(i) * W.cols;
          const double* wrow = wv + static_cast<std::size_t>(i) * W.cols;
          for (int j = 0; j < W.cols; ++j) {
            gwrow[j] += g[i] * xv[j];
            gx[j] += wrow[j] * g[i];
          }
        }
        break;
      }
      case Op::kMatvec: {
        const Node& W = nodes_[args[0]];
        const Node& x = nodes_[args[1]];
        double* gw = grad(W);
        double* gx = grad(x);
        const double* wv = data(W);
        const double* xv = data(x);
        for (int i = 0; i < W.rows; ++i) {
          double* gwrow = gw + static_cast<std::size_t>(i) * W.cols;
          const double* wrow = wv + static_cast<std::size_t>(i) * W.cols;
          for (int j = 0; j < W.cols; ++j) {
            gwrow[j] += g[i] * xv[j];
            gx[j] += wrow[j] * g[i];
          }
        }
        break;
      }
      case Op::kAdd: {
        double* ga = grad(nodes_[args[0]]);
        double* gb = grad(nodes_[args[1]]);
        for (int i = 0; i < n.rows * n.cols; ++i) {
          ga[i] += g[i];
          gb[i] += g[i];
        }
        break;
      }
      case Op::kSub: {
        double* ga = grad(nodes_[args[0]]);
        double* gb = grad(nodes_[args[1]]);
        for (int i = 0; i < n.rows * n.cols; ++i) {
          ga[i] += g[i];
          gb[i] -= g[i];
        }
        break;
      }
      case Op::kHadamard: {
        const Node& a = nodes_[args[0]];
        const Node& b = nodes_[args[1]];
        double* ga = grad(a);
        double* gb = grad(b);
        const double* av = data(a);
        const double* bv = data(b);
        for (int i = 0; i < n.rows * n.cols; ++i) {
          ga[i] += g[i] * bv[i];
          gb[i] += g[i] * av[i];
        }
        break;
      }
      case Op::kAct: {
        const Node& x = nodes_[args[0]];
        double* gx = grad(x);
        const double* xv = data(x);
        const double* yv = data(n);
        switch (static_cast<Act>(n.aux)) {
          case Act::kSigmoid:
            for (int i = 0; i < n.rows * n.cols; ++i) {
              gx[i] += g[i] * yv[i] * (1.0 - yv[i]);
            }
            break;
          case Act::kTanh:
            for (int i = 0; i < n.rows * n.cols; ++i) {
              gx[i] += g[i] * (1.0 - yv[i] * yv[i]);
            }
            break;
          case Act::kLeakyRelu:
            for (int i = 0; i < n.rows * n.cols; ++i) {
              gx[i] += g[i] * (xv[i] >= 0.0 ? 1.0 : kLeakySlope);
            }
            break;
        }
        break;
      }
      case Op::kConcat: {
        const double* gp = g;
        for (int k = 0; k < n.nargs; ++k) {
          const Node& p = nodes_[args[k]];
          double* gpart = grad(p);
          for (int i = 0; i < p.rows; ++i) {
            gpart[i] += gp[i];
          }
          gp += p.rows;
        }
        break;
      }
      case Op::kSlice: {
        double* gx = grad(nodes_[args[0]]);
        for (int i = 0; i < n.rows; ++i) {
          gx[n.aux + i] += g[i];
        }
        break;
      }
      case Op::kDot: {
        const Node& a = nodes_[args[0]];
        const Node& b = nodes_[args[1]];
        double* ga = grad(a);
        double* gb = grad(b);
        const double* av = data(a);
        const double* bv = data(b);
        for (int i = 0; i < a.rows; ++i) {
          ga[i] += g[0] * bv[i];
          gb[i] += g[0] * av[i];
        }
        break;
      }
      case Op::kGroupedSoftmax: {
        double* gs = grad(nodes_[args[0]]);
        const double* w = data(n);
        for (int k = 0; k < n.aux2; ++k) {
          const auto& [b, e] = groups_[n.aux + k];
          double inner = 0.0;
          for (int i = b; i < e; ++i) {
            inner += g[i] * w[i];
          }
          for (int i = b; i < e; ++i) {
            gs[i] += w[i] * (g[i] - inner);
          }
        }
        break;
      }
      case Op::kWeightedSum: {
        const Node& w = nodes_[args[0]];
        double* gw = grad(w);
        const double* wv = data(w);
        for (int k = 1; k < n.nargs; ++k) {
          const Node& item = nodes_[args[k]];
          double* gi = grad(item);
          const double* iv = data(item);
          double acc = 0.0;
          for (int i = 0; i < n.rows; ++i) {
            acc += g[i] * iv[i];
            gi[i] += wv[k - 1] * g[i];
          }
          gw[k - 1] += acc;
        }
        break;
      }
      case Op::kLogSoftmax: {
        double* gx = grad(nodes_[args[0]]);
        const double* yv = data(n);
        double gsum = 0.0;
        for (int i = 0; i < n.rows; ++i) {
          gsum += g[i];
        }
        for (int i = 0; i < n.rows; ++i) {
          gx[i] += g[i] - std::exp(yv[i]) * gsum;
        }
        break;
      }
      case Op::kPick: {
        double* gx = grad(nodes_[args[0]]);
        gx[n.aux] += g[0];
        break;
      }
      case Op::kSum: {
        const Node& x = nodes_[args[0]];
        double* gx = grad(x);
        for (int i = 0; i < x.rows * x.cols; ++i) {
          gx[i] += g[0];
        }
        break;
      }
      case Op::kScale: {
        double* gx = grad(nodes_[args[0]]);
        for (int i = 0; i < n.rows * n.cols; ++i) {
          gx[i] += n.auxd * g[i];
        }
        break;
      }
    }
  }
}

double finite_diff_check(const std::function<double(std::span<const double>)>& f,
                         std::span<const double> params,
                         std::span<const double> analytic_grad,
                         double epsilon) {
  if (epsilon <= 0.0) {
    throw std::invalid_argument("finite_diff_check: epsilon must be positive");
  }
  if (params.size() != analytic_grad.size()) {
    throw std::invalid_argument("finite_diff_check: gradient size mismatch");
  }
  std::vector<double> p(params.begin(), params.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double saved = p[i];
    p[i] = saved + epsilon;
    double up = f(p);
    p[i] = saved - epsilon;
    double down = f(p);
    p[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw std::runtime_error("finite_diff_check: non-finite function value");
    }
    double fd = (up - down) / (2.0 * epsilon);
    double rel = std::abs(fd - analytic_grad[i]) /
                 (std::abs(fd) + std::abs(analytic_grad[i]) + 1e-12);
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace biggat
