#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace ide {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

/// One value in the define-by-run computation graph. Scalars are 1x1,
/// vectors are dx1. grad always matches the shape of value.
class Node {
 public:
  Matrix value;
  Matrix grad;
  std::vector<std::shared_ptr<Node>> inputs;
  // Receives the adjoint of this node, returns one adjoint per input.
  std::function<std::vector<Matrix>(const Matrix&)> backprop;
  // In-place alternative for single-input extraction ops: adds this node's
  // contribution directly into the input's adjoint buffer, avoiding a
  // full-size temporary per call.
  std::function<void(const Matrix&, Matrix&)> backprop_into;

  explicit Node(Matrix v) : value(std::move(v)) {
    grad = Matrix::Zero(value.rows(), value.cols());
  }

  bool is_scalar() const { return value.rows() == 1 && value.cols() == 1; }
  double scalar() const {
    if (!is_scalar()) throw ContractError("scalar() on non-scalar node");
    return value(0, 0);
  }
  void zero_grad() { grad.setZero(); }
};

using NodePtr = std::shared_ptr<Node>;

NodePtr constant(Matrix v);
NodePtr constant(double v);
NodePtr constant_vec(const Vector& v);

// Elementwise and structural ops. Every op builds the backward closure
// at call time; graphs are rebuilt each step.
NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr sub(const NodePtr& a, const NodePtr& b);
NodePtr mul(const NodePtr& a, const NodePtr& b);
NodePtr scale(const NodePtr& a, double c);
NodePtr neg(const NodePtr& a);
NodePtr matvec(const NodePtr& w, const NodePtr& x);
NodePtr relu(const NodePtr& a);
NodePtr sum(const NodePtr& a);
NodePtr mean(const NodePtr& a);
NodePtr exp(const NodePtr& a);
NodePtr log(const NodePtr& a);
// log(max(a, floor)) elementwise; gradient is zero where the floor binds.
NodePtr log_floored(const NodePtr& a, double floor);
NodePtr square(const NodePtr& a);
NodePtr l2_norm(const NodePtr& a);
// a / s with scalar s.
NodePtr scalar_divide(const NodePtr& a, const NodePtr& s);
// Max-subtracted softmax over a column vector.
NodePtr softmax(const NodePtr& logits);
// Element (i) of a column vector as a scalar node.
NodePtr pick(const NodePtr& v, Eigen::Index i);
// sum_i coeffs[i] * terms[i]; coefficients are plain constants.
NodePtr linear_combination(const std::vector<NodePtr>& terms,
                           const std::vector<double>& coeffs);
// x + b with the column vector b broadcast across every column of x.
NodePtr broadcast_add_col(const NodePtr& x, const NodePtr& b);
// Column j of a matrix as a column-vector node.
NodePtr column(const NodePtr& x, Eigen::Index j);
// Identity forward, zero gradient to the input.
NodePtr stop_gradient(const NodePtr& a);

/// Reverse pass from a scalar root. Adjoints are computed per call and
/// added into each node's grad, so repeated calls accumulate.
void backward(const NodePtr& loss);

}  // namespace ide
