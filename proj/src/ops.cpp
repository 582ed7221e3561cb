#include "swae/ops.hpp"

#include <cmath>

namespace swae {

namespace {

void require_same_tape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.tape() != b.tape())
    throw std::invalid_argument(std::string(op) + ": operands live on different tapes");
}

[[noreturn]] void shape_error(const char* op, const Matrix& a, const Matrix& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " +
                              Tape::shape_str(a) + " and " + Tape::shape_str(b));
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b, "add");
  Tape& t = *a.tape();
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  const bool broadcast = bv.rows() == 1 && av.cols() == bv.cols() && av.rows() != 1;
  if (!broadcast && (av.rows() != bv.rows() || av.cols() != bv.cols()))
    shape_error("add", av, bv);
  Matrix out = broadcast ? Matrix(av.rowwise() + bv.row(0)) : Matrix(av + bv);
  return t.make(std::move(out), [a, b, broadcast](Tape& tp, const Matrix& g) {
    tp.grad_ref(a) += g;
    if (broadcast)
      tp.grad_ref(b) += g.colwise().sum();
    else
      tp.grad_ref(b) += g;
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b, "sub");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) shape_error("sub", av, bv);
  return a.tape()->make(av - bv, [a, b](Tape& tp, const Matrix& g) {
    tp.grad_ref(a) += g;
    tp.grad_ref(b) -= g;
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b, "mul");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) shape_error("mul", av, bv);
  return a.tape()->make(av.cwiseProduct(bv), [a, b](Tape& tp, const Matrix& g) {
    tp.grad_ref(a) += g.cwiseProduct(tp.value(b));
    tp.grad_ref(b) += g.cwiseProduct(tp.value(a));
  });
}

Tensor affine(const Tensor& a, double alpha, double beta) {
  return a.tape()->make((alpha * a.value()).array() + beta,
                        [a, alpha](Tape& tp, const Matrix& g) {
                          tp.grad_ref(a) += alpha * g;
                        });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b, "matmul");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) shape_error("matmul", av, bv);
  return a.tape()->make(av * bv, [a, b](Tape& tp, const Matrix& g) {
    tp.grad_ref(a) += g * tp.value(b).transpose();
    tp.grad_ref(b) += tp.value(a).transpose() * g;
  });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b, "concat_cols");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows()) shape_error("concat_cols", av, bv);
  Matrix out(av.rows(), av.cols() + bv.cols());
  out << av, bv;
  const Index ac = av.cols(), bc = bv.cols();
  return a.tape()->make(std::move(out), [a, b, ac, bc](Tape& tp, const Matrix& g) {
    tp.grad_ref(a) += g.leftCols(ac);
    tp.grad_ref(b) += g.rightCols(bc);
  });
}

Tensor slice_cols(const Tensor& a, Index begin, Index len) {
  const Matrix& av = a.value();
  if (begin < 0 || len < 0 || begin + len > av.cols())
    throw std::invalid_argument("slice_cols: range [" + std::to_string(begin) + ", " +
                                std::to_string(begin + len) + ") out of bounds for " +
                                Tape::shape_str(av));
  return a.tape()->make(av.middleCols(begin, len),
                        [a, begin, len](Tape& tp, const Matrix& g) {
                          tp.grad_ref(a).middleCols(begin, len) += g;
                        });
}

Tensor gather_rows(const Tensor& m, const std::vector<int>& ids) {
  const Matrix& mv = m.value();
  Matrix out(static_cast<Index>(ids.size()), mv.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= mv.rows())
      throw std::invalid_argument("gather_rows: row " + std::to_string(ids[i]) +
                                  " out of range for " + Tape::shape_str(mv));
    out.row(static_cast<Index>(i)) = mv.row(ids[i]);
  }
  return m.tape()->make(std::move(out), [m, ids](Tape& tp, const Matrix& g) {
    Matrix& mg = tp.grad_ref(m);
    for (std::size_t i = 0; i < ids.size(); ++i)
      mg.row(ids[i]) += g.row(static_cast<Index>(i));
  });
}

Tensor scale_rows(const Tensor& a, const Vector& factors) {
  const Matrix& av = a.value();
  if (factors.size() != av.rows())
    throw std::invalid_argument("scale_rows: " + std::to_string(factors.size()) +
                                " factors for " + Tape::shape_str(av));
  return a.tape()->make(factors.asDiagonal() * av,
                        [a, factors](Tape& tp, const Matrix& g) {
                          tp.grad_ref(a) += factors.asDiagonal() * g;
                        });
}

Tensor tanh(const Tensor& a) {
  Tape& t = *a.tape();
  Tensor out = t.make(a.value().array().tanh(), nullptr);
  t.set_backprop(out, [a, out](Tape& tp, const Matrix& g) {
    const Matrix& y = tp.value(out);
    tp.grad_ref(a).array() += g.array() * (1.0 - y.array().square());
  });
  return out;
}

Tensor sigmoid(const Tensor& a) {
  Tape& t = *a.tape();
  Tensor out = t.make(((-a.value().array()).exp() + 1.0).inverse(), nullptr);
  t.set_backprop(out, [a, out](Tape& tp, const Matrix& g) {
    const Matrix& y = tp.value(out);
    tp.grad_ref(a).array() += g.array() * y.array() * (1.0 - y.array());
  });
  return out;
}

Tensor exp(const Tensor& a) {
  Tape& t = *a.tape();
  Tensor out = t.make(a.value().array().exp(), nullptr);
  t.set_backprop(out, [a, out](Tape& tp, const Matrix& g) {
    tp.grad_ref(a).array() += g.array() * tp.value(out).array();
  });
  return out;
}

Tensor log(const Tensor& a) {
  const Matrix& av = a.value();
  if (av.size() > 0 && av.minCoeff() <= 0.0)
    throw std::invalid_argument("log: non-positive entry " +
                                std::to_string(av.minCoeff()));
  return a.tape()->make(av.array().log(), [a](Tape& tp, const Matrix& g) {
    tp.grad_ref(a).array() += g.array() / tp.value(a).array();
  });
}

Tensor softmax(const Tensor& a) {
  const Matrix& av = a.value();
  Matrix out(av.rows(), av.cols());
  for (Index r = 0; r < av.rows(); ++r) {
    Eigen::ArrayXd e = (av.row(r).array() - av.row(r).maxCoeff()).exp();
    out.row(r) = e / e.sum();
  }
  Tape& t = *a.tape();
  Tensor res = t.make(std::move(out), nullptr);
  t.set_backprop(res, [a, res](Tape& tp, const Matrix& g) {
    const Matrix& y = tp.value(res);
    Matrix& ag = tp.grad_ref(a);
    for (Index r = 0; r < y.rows(); ++r) {
      const double dot = g.row(r).dot(y.row(r));
      ag.row(r).array() += y.row(r).array() * (g.row(r).array() - dot);
    }
  });
  return res;
}

Tensor sum(const Tensor& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.tape()->make(std::move(out), [a](Tape& tp, const Matrix& g) {
    tp.grad_ref(a).array() += g(0, 0);
  });
}

Tensor mean(const Tensor& a) {
  const double n = static_cast<double>(a.value().size());
  Matrix out(1, 1);
  out(0, 0) = a.value().mean();
  return a.tape()->make(std::move(out), [a, n](Tape& tp, const Matrix& g) {
    tp.grad_ref(a).array() += g(0, 0) / n;
  });
}

Tensor squared_distance(const Tensor& a, const Tensor& b) {
  require_same_tape(a, b, "squared_distance");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols())
    shape_error("squared_distance", av, bv);
  Matrix out(1, 1);
  out(0, 0) = (av - bv).squaredNorm();
  return a.tape()->make(std::move(out), [a, b](Tape& tp, const Matrix& g) {
    const Matrix diff = 2.0 * g(0, 0) * (tp.value(a) - tp.value(b));
    tp.grad_ref(a) += diff;
    tp.grad_ref(b) -= diff;
  });
}

Tensor cross_entropy_sum(const Tensor& logits, const std::vector<int>& targets,
                         const std::vector<double>& weights) {
  const Matrix& x = logits.value();
  if (static_cast<Index>(targets.size()) != x.rows() || targets.size() != weights.size())
    throw std::invalid_argument("cross_entropy_sum: " + std::to_string(targets.size()) +
                                " targets / " + std::to_string(weights.size()) +
                                " weights for logits " + Tape::shape_str(x));
  double total = 0.0;
  for (Index r = 0; r < x.rows(); ++r) {
    const int tgt = targets[static_cast<std::size_t>(r)];
    if (tgt < 0 || tgt >= x.cols())
      throw std::invalid_argument("cross_entropy_sum: target " + std::to_string(tgt) +
                                  " out of range for " + Tape::shape_str(x));
    const double m = x.row(r).maxCoeff();
    const double lse = m + std::log((x.row(r).array() - m).exp().sum());
    total += weights[static_cast<std::size_t>(r)] * (lse - x(r, tgt));
  }
  Matrix out(1, 1);
  out(0, 0) = total;
  return logits.tape()->make(std::move(out), [logits, targets, weights](
                                                 Tape& tp, const Matrix& g) {
    const Matrix& x = tp.value(logits);
    Matrix& lg = tp.grad_ref(logits);
    for (Index r = 0; r < x.rows(); ++r) {
      const double w = weights[static_cast<std::size_t>(r)] * g(0, 0);
      if (w == 0.0) continue;
      const double m = x.row(r).maxCoeff();
      Eigen::ArrayXd e = (x.row(r).array() - m).exp();
      Eigen::ArrayXd p = e / e.sum();
      lg.row(r).array() += w * p;
      lg(r, targets[static_cast<std::size_t>(r)]) -= w;
    }
  });
}

} // namespace swae
