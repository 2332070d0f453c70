#include "ide/autodiff.hpp"

#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace ide {

namespace {

void check_same_shape(const NodePtr& a, const NodePtr& b, const char* op) {
  if (a->value.rows() != b->value.rows() ||
      a->value.cols() != b->value.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch (" +
                         std::to_string(a->value.rows()) + "x" +
                         std::to_string(a->value.cols()) + " vs " +
                         std::to_string(b->value.rows()) + "x" +
                         std::to_string(b->value.cols()) + ")");
  }
}

NodePtr make(Matrix v, std::vector<NodePtr> inputs,
             std::function<std::vector<Matrix>(const Matrix&)> backprop) {
  auto n = std::make_shared<Node>(std::move(v));
  n->inputs = std::move(inputs);
  n->backprop = std::move(backprop);
  return n;
}

}  // namespace

NodePtr constant(Matrix v) { return std::make_shared<Node>(std::move(v)); }

NodePtr constant(double v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return constant(std::move(m));
}

NodePtr constant_vec(const Vector& v) { return constant(Matrix(v)); }

NodePtr add(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a, b, "add");
  return make(a->value + b->value, {a, b},
              [](const Matrix& g) { return std::vector<Matrix>{g, g}; });
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a, b, "sub");
  return make(a->value - b->value, {a, b},
              [](const Matrix& g) { return std::vector<Matrix>{g, -g}; });
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a, b, "mul");
  Matrix av = a->value, bv = b->value;
  return make(av.cwiseProduct(bv), {a, b}, [av, bv](const Matrix& g) {
    return std::vector<Matrix>{g.cwiseProduct(bv), g.cwiseProduct(av)};
  });
}

NodePtr scale(const NodePtr& a, double c) {
  return make(a->value * c, {a},
              [c](const Matrix& g) { return std::vector<Matrix>{g * c}; });
}

NodePtr neg(const NodePtr& a) { return scale(a, -1.0); }

NodePtr matvec(const NodePtr& w, const NodePtr& x) {
  if (w->value.cols() != x->value.rows()) {
    throw DimensionError("matvec: inner dimensions disagree");
  }
  Matrix wv = w->value, xv = x->value;
  return make(wv * xv, {w, x}, [wv, xv](const Matrix& g) {
    return std::vector<Matrix>{g * xv.transpose(), wv.transpose() * g};
  });
}

NodePtr relu(const NodePtr& a) {
  Matrix mask = (a->value.array() > 0.0).cast<double>();
  return make(a->value.cwiseMax(0.0), {a}, [mask](const Matrix& g) {
    return std::vector<Matrix>{g.cwiseProduct(mask)};
  });
}

NodePtr sum(const NodePtr& a) {
  Eigen::Index r = a->value.rows(), c = a->value.cols();
  Matrix out(1, 1);
  out(0, 0) = a->value.sum();
  return make(out, {a}, [r, c](const Matrix& g) {
    return std::vector<Matrix>{Matrix::Constant(r, c, g(0, 0))};
  });
}

NodePtr mean(const NodePtr& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a->value.size()));
}

NodePtr exp(const NodePtr& a) {
  Matrix ev = a->value.array().exp().matrix();
  return make(ev, {a}, [ev](const Matrix& g) {
    return std::vector<Matrix>{g.cwiseProduct(ev)};
  });
}

NodePtr log(const NodePtr& a) {
  Matrix av = a->value;
  return make(av.array().log().matrix(), {a}, [av](const Matrix& g) {
    return std::vector<Matrix>{g.cwiseQuotient(av)};
  });
}

NodePtr log_floored(const NodePtr& a, double floor) {
  Matrix clamped = a->value.cwiseMax(floor);
  Matrix mask = (a->value.array() > floor).cast<double>();
  return make(clamped.array().log().matrix(), {a},
              [clamped, mask](const Matrix& g) {
                return std::vector<Matrix>{
                    g.cwiseQuotient(clamped).cwiseProduct(mask)};
              });
}

NodePtr square(const NodePtr& a) {
  Matrix av = a->value;
  return make(av.cwiseProduct(av), {a}, [av](const Matrix& g) {
    return std::vector<Matrix>{2.0 * g.cwiseProduct(av)};
  });
}

NodePtr l2_norm(const NodePtr& a) {
  double n = a->value.norm();
  Matrix out(1, 1);
  out(0, 0) = n;
  Matrix av = a->value;
  return make(out, {a}, [av, n](const Matrix& g) {
    // subgradient 0 at the origin
    if (n == 0.0) {
      return std::vector<Matrix>{Matrix::Zero(av.rows(), av.cols())};
    }
    return std::vector<Matrix>{(g(0, 0) / n) * av};
  });
}

NodePtr scalar_divide(const NodePtr& a, const NodePtr& s) {
  if (!s->is_scalar()) throw ContractError("scalar_divide: divisor not scalar");
  double sv = s->scalar();
  Matrix av = a->value;
  return make(av / sv, {a, s}, [av, sv](const Matrix& g) {
    Matrix ds(1, 1);
    ds(0, 0) = -g.cwiseProduct(av).sum() / (sv * sv);
    return std::vector<Matrix>{g / sv, ds};
  });
}

NodePtr softmax(const NodePtr& logits) {
  if (logits->value.cols() != 1 || logits->value.rows() == 0) {
    throw DimensionError("softmax: expects a non-empty column vector");
  }
  Eigen::ArrayXd shifted =
      logits->value.col(0).array() - logits->value.col(0).maxCoeff();
  Eigen::ArrayXd e = shifted.exp();
  Vector y = (e / e.sum()).matrix();
  return make(Matrix(y), {logits}, [y](const Matrix& g) {
    double dot = y.dot(g.col(0));
    Vector dx = y.cwiseProduct(g.col(0) - Vector::Constant(y.size(), dot));
    return std::vector<Matrix>{Matrix(dx)};
  });
}

NodePtr pick(const NodePtr& v, Eigen::Index i) {
  if (v->value.cols() != 1) throw DimensionError("pick: expects column vector");
  if (i < 0 || i >= v->value.rows()) throw DimensionError("pick: index out of range");
  Matrix out(1, 1);
  out(0, 0) = v->value(i, 0);
  auto n = std::make_shared<Node>(std::move(out));
  n->inputs = {v};
  n->backprop_into = [i](const Matrix& g, Matrix& dv) { dv(i, 0) += g(0, 0); };
  return n;
}

NodePtr linear_combination(const std::vector<NodePtr>& terms,
                           const std::vector<double>& coeffs) {
  if (terms.empty() || terms.size() != coeffs.size()) {
    throw DimensionError("linear_combination: empty or mismatched arguments");
  }
  Matrix acc = Matrix::Zero(terms[0]->value.rows(), terms[0]->value.cols());
  for (size_t i = 0; i < terms.size(); ++i) {
    check_same_shape(terms[0], terms[i], "linear_combination");
    acc += coeffs[i] * terms[i]->value;
  }
  return make(std::move(acc), terms, [coeffs](const Matrix& g) {
    std::vector<Matrix> out;
    out.reserve(coeffs.size());
    for (double c : coeffs) out.push_back(c * g);
    return out;
  });
}

NodePtr broadcast_add_col(const NodePtr& x, const NodePtr& b) {
  if (b->value.cols() != 1 || b->value.rows() != x->value.rows()) {
    throw DimensionError("broadcast_add_col: bias must be rows(x) x 1");
  }
  Matrix out = x->value.colwise() + b->value.col(0);
  return make(std::move(out), {x, b}, [](const Matrix& g) {
    return std::vector<Matrix>{g, Matrix(g.rowwise().sum())};
  });
}

NodePtr column(const NodePtr& x, Eigen::Index j) {
  if (j < 0 || j >= x->value.cols()) {
    throw DimensionError("column: index out of range");
  }
  auto n = std::make_shared<Node>(Matrix(x->value.col(j)));
  n->inputs = {x};
  n->backprop_into = [j](const Matrix& g, Matrix& dx) { dx.col(j) += g.col(0); };
  return n;
}

NodePtr stop_gradient(const NodePtr& a) {
  return make(a->value, {a}, [rows = a->value.rows(), cols = a->value.cols()](
                                 const Matrix&) {
    return std::vector<Matrix>{Matrix::Zero(rows, cols)};
  });
}

void backward(const NodePtr& loss) {
  if (!loss->is_scalar()) throw ContractError("backward: root must be scalar");

  // Topological order over the DAG, iterative to survive deep graphs.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(loss.get(), 0);
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      Node* child = node->inputs[next++].get();
      if (visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Per-call adjoints keep repeated backward() calls purely additive.
  std::unordered_map<Node*, Matrix> adjoint;
  adjoint[loss.get()] = Matrix::Ones(1, 1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    auto found = adjoint.find(node);
    if (found == adjoint.end()) continue;
    node->grad += found->second;
    if (node->backprop_into) {
      Node* in = node->inputs[0].get();
      auto [slot, inserted] = adjoint.try_emplace(in);
      if (inserted) {
        slot->second = Matrix::Zero(in->value.rows(), in->value.cols());
      }
      node->backprop_into(found->second, slot->second);
      continue;
    }
    if (!node->backprop) continue;
    std::vector<Matrix> input_grads = node->backprop(found->second);
    for (size_t i = 0; i < node->inputs.size(); ++i) {
      Node* in = node->inputs[i].get();
      auto [slot, inserted] = adjoint.try_emplace(in, input_grads[i]);
      if (!inserted) slot->second += input_grads[i];
    }
  }
}

}  // namespace ide
