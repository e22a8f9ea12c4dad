#include "atn/autograd.hpp"

#include <algorithm>
#include <cmath>

#include "atn/error.hpp"

namespace atn {

const Tensor& Var::value() const { return tape_->value(id_); }
std::span<const double> Var::grad() const { return tape_->grad(id_); }

// --- Tape -----------------------------------------------------------------

Var Tape::constant(Tensor t) {
  Node n;
  n.needs_grad = t.requires_grad();
  n.owned = std::move(t);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::bind(Tensor& t) {
  Node n;
  n.external = &t;
  n.grad_sink = &t;
  n.needs_grad = t.requires_grad();
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::bind(const Tensor& t) {
  Node n;
  n.external = &t;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, Backward backward) {
  Node n;
  n.owned = std::move(value);
  n.needs_grad = std::any_of(inputs.begin(), inputs.end(),
                             [this](std::size_t i) { return nodes_[i].needs_grad; });
  if (n.needs_grad) n.backward = std::move(backward);
  n.inputs = std::move(inputs);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.external ? *n.external : n.owned;
}

std::span<double> Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  std::size_t len = value(id).size();
  if (n.grad.size() != len) n.grad.assign(len, 0.0);
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.valid() && &loss.tape() != this) throw Error("backward: loss belongs to another tape");
  if (!loss.valid() || loss.value().rank() != 0) {
    throw ShapeError("backward: loss must be a rank-0 tensor, got " +
                     (loss.valid() ? dims_str(loss.dims()) : std::string("invalid var")));
  }
  for (auto& n : nodes_) n.grad.clear();
  grad_buffer(loss.id())[0] = 1.0;
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.grad.empty() || !n.needs_grad) continue;
    if (n.backward) {
      n.backward(*this, id);
    } else if (n.grad_sink) {
      auto dst = n.grad_sink->grad();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += n.grad[i];
    }
  }
}

// --- helpers ---------------------------------------------------------------

namespace {

Tape& same_tape(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid() || &a.tape() != &b.tape()) {
    throw Error(std::string(op) + ": operands are not on the same tape");
  }
  return a.tape();
}

void accumulate(Tape& t, std::size_t id, std::span<const double> g) {
  if (!t.needs_grad(id)) return;
  auto dst = t.grad_buffer(id);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
}

enum class BinOp { Add, Sub, Mul };

Var binary(Var a, Var b, BinOp op, const char* name) {
  Tape& t = same_tape(a, b, name);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  bool a_scalar = av.rank() == 0;
  bool b_scalar = bv.rank() == 0;
  if (!a_scalar && !b_scalar && av.dims() != bv.dims()) {
    throw ShapeError(std::string(name) + ": shape mismatch " + dims_str(av.dims()) + " vs " +
                     dims_str(bv.dims()));
  }
  const Dims& out_dims = a_scalar ? bv.dims() : av.dims();
  Tensor out(out_dims);
  std::size_t n = out.size();
  auto ai = [&](std::size_t i) { return a_scalar ? av[0] : av[i]; };
  auto bi = [&](std::size_t i) { return b_scalar ? bv[0] : bv[i]; };
  for (std::size_t i = 0; i < n; ++i) {
    switch (op) {
      case BinOp::Add: out[i] = ai(i) + bi(i); break;
      case BinOp::Sub: out[i] = ai(i) - bi(i); break;
      case BinOp::Mul: out[i] = ai(i) * bi(i); break;
    }
  }
  std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [=](Tape& tp, std::size_t o) {
    auto g = tp.grad(o);
    const Tensor& av = tp.value(ia);
    const Tensor& bv = tp.value(ib);
    if (tp.needs_grad(ia)) {
      auto ga = tp.grad_buffer(ia);
      for (std::size_t i = 0; i < g.size(); ++i) {
        double d = g[i];
        if (op == BinOp::Mul) d *= b_scalar ? bv[0] : bv[i];
        ga[a_scalar ? 0 : i] += d;
      }
    }
    if (tp.needs_grad(ib)) {
      auto gb = tp.grad_buffer(ib);
      for (std::size_t i = 0; i < g.size(); ++i) {
        double d = g[i];
        if (op == BinOp::Sub) d = -d;
        if (op == BinOp::Mul) d *= a_scalar ? av[0] : av[i];
        gb[b_scalar ? 0 : i] += d;
      }
    }
  });
}

// Unary map whose derivative is expressed through input x and output y.
template <typename F, typename D>
Var unary(Var a, F f, D df) {
  Tape& t = a.tape();
  const Tensor& av = a.value();
  Tensor out(av.dims());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
  std::size_t ia = a.id();
  return t.record(std::move(out), {ia}, [=](Tape& tp, std::size_t o) {
    auto g = tp.grad(o);
    const Tensor& x = tp.value(ia);
    const Tensor& y = tp.value(o);
    auto gx = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * df(x[i], y[i]);
  });
}

}  // namespace

// --- algebra -----------------------------------------------------------------

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b, "matmul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || (bv.rank() != 1 && bv.rank() != 2)) {
    throw ShapeError("matmul: unsupported ranks " + dims_str(av.dims()) + " * " +
                     dims_str(bv.dims()));
  }
  std::size_t m = av.dims()[0], k = av.dims()[1];
  std::size_t kb = bv.dims()[0];
  std::size_t n = bv.rank() == 2 ? bv.dims()[1] : 1;
  if (k != kb) {
    throw ShapeError("matmul: dimension mismatch " + dims_str(av.dims()) + " * " +
                     dims_str(bv.dims()));
  }
  Tensor out(bv.rank() == 2 ? Dims{m, n} : Dims{m});
  const double* A = av.value().data();
  const double* B = bv.value().data();
  double* C = out.value().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      double aip = A[i * k + p];
      const double* brow = B + p * n;
      double* crow = C + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
  std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(out), {ia, ib}, [=](Tape& tp, std::size_t o) {
    auto G = tp.grad(o);
    const double* A = tp.value(ia).value().data();
    const double* B = tp.value(ib).value().data();
    if (tp.needs_grad(ia)) {
      // dA = G * B^T
      auto gA = tp.grad_buffer(ia);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += G[i * n + j] * B[p * n + j];
          gA[i * k + p] += s;
        }
    }
    if (tp.needs_grad(ib)) {
      // dB = A^T * G
      auto gB = tp.grad_buffer(ib);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double aip = A[i * k + p];
          for (std::size_t j = 0; j < n; ++j) gB[p * n + j] += aip * G[i * n + j];
        }
    }
  });
}

Var add(Var a, Var b) { return binary(a, b, BinOp::Add, "add"); }
Var sub(Var a, Var b) { return binary(a, b, BinOp::Sub, "sub"); }
Var hadamard(Var a, Var b) { return binary(a, b, BinOp::Mul, "hadamard"); }

Var scale(Var a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var sigmoid(Var a) {
  return unary(
      a,
      [](double x) {
        if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
        double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); },
               [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return unary(a, [](double x) { return x > 0 ? x : 0.0; },
               [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Var abs(Var a) {
  return unary(a, [](double x) { return std::fabs(x); },
               [](double x, double) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Var log_floor(Var a, double floor) {
  return unary(a, [floor](double x) { return std::log(std::max(x, floor)); },
               [floor](double x, double) { return x > floor ? 1.0 / x : 0.0; });
}

Var softmax_rows(Var a) {
  Tape& t = a.tape();
  const Tensor& av = a.value();
  if (av.rank() == 0 || av.cols() == 0) {
    throw ShapeError("softmax_rows: needs at least one column, got " + dims_str(av.dims()));
  }
  std::size_t r = av.rows(), n = av.cols();
  Tensor out(av.dims());
  for (std::size_t i = 0; i < r; ++i) {
    const double* x = av.value().data() + i * n;
    double* y = out.value().data() + i * n;
    double mx = *std::max_element(x, x + n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      y[j] = std::exp(x[j] - mx);
      z += y[j];
    }
    for (std::size_t j = 0; j < n; ++j) y[j] /= z;
  }
  std::size_t ia = a.id();
  return t.record(std::move(out), {ia}, [=](Tape& tp, std::size_t o) {
    auto g = tp.grad(o);
    const Tensor& y = tp.value(o);
    auto gx = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += g[i * n + j] * y[i * n + j];
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += y[i * n + j] * (g[i * n + j] - dot);
    }
  });
}

// --- structural ----------------------------------------------------------------

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  Tape& t = parts[0].tape();
  std::size_t width = parts[0].value().cols();
  std::size_t rows = 0;
  std::vector<std::size_t> ids;
  for (const Var& p : parts) {
    same_tape(parts[0], p, "concat_rows");
    const Tensor& v = p.value();
    if (v.rank() == 0 || v.cols() != width) {
      throw ShapeError("concat_rows: width mismatch " + dims_str(parts[0].dims()) + " vs " +
                       dims_str(v.dims()));
    }
    rows += v.rows();
    ids.push_back(p.id());
  }
  Tensor out(Dims{rows, width});
  std::size_t off = 0;
  for (const Var& p : parts) {
    auto v = p.value().value();
    std::copy(v.begin(), v.end(), out.value().begin() + off);
    off += v.size();
  }
  return t.record(std::move(out), ids, [ids](Tape& tp, std::size_t o) {
    auto g = tp.grad(o);
    std::size_t off = 0;
    for (auto id : ids) {
      std::size_t len = tp.value(id).size();
      accumulate(tp, id, g.subspan(off, len));
      off += len;
    }
  });
}

Var concat_vec(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_vec: no inputs");
  Tape& t = parts[0].tape();
  std::vector<std::size_t> ids;
  std::vector<double> data;
  for (const Var& p : parts) {
    same_tape(parts[0], p, "concat_vec");
    auto v = p.value().value();
    data.insert(data.end(), v.begin(), v.end());
    ids.push_back(p.id());
  }
  Tensor out = Tensor::vector(std::move(data));
  return t.record(std::move(out), ids, [ids](Tape& tp, std::size_t o) {
    auto g = tp.grad(o);
    std::size_t off = 0;
    for (auto id : ids) {
      std::size_t len = tp.value(id).size();
      accumulate(tp, id, g.subspan(off, len));
      off += len;
    }
  });
}

Var sum_rows(Var a) {
  Tape& t = a.tape();
  const Tensor& av = a.value();
  if (av.rank() != 2) throw ShapeError("sum_rows: expected matrix, got " + dims_str(av.dims()));
  std::size_t r = av.rows(), n = av.cols();
  Tensor out(Dims{n});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j] += av[i * n + j];
  std::size_t ia = a.id();
  return t.record(std::move(out), {ia}, [=](Tape& tp, std::size_t o) {
    auto g = tp.grad(o);
    auto gx = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += g[j];
  });
}

Var sum_all(Var a) {
  Tape& t = a.tape();
  double s = 0.0;
  for (double x : a.value().value()) s += x;
  std::size_t ia = a.id();
  return t.record(Tensor::scalar(s), {ia}, [=](Tape& tp, std::size_t o) {
    double g = tp.grad(o)[0];
    for (double& gx : tp.grad_buffer(ia)) gx += g;
  });
}

Var mean_all(Var a) {
  std::size_t n = a.size();
  if (n == 0) throw ShapeError("mean_all: empty tensor");
  return scale(sum_all(a), 1.0 / static_cast<double>(n));
}

Var add_n(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("add_n: no inputs");
  Var acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) acc = add(acc, parts[i]);
  return acc;
}

Var transpose(Var a) {
  Tape& t = a.tape();
  const Tensor& av = a.value();
  if (av.rank() == 0) throw ShapeError("transpose: scalar input");
  std::size_t r = av.rows(), n = av.cols();
  Tensor out(Dims{n, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * r + i] = av[i * n + j];
  std::size_t ia = a.id();
  return t.record(std::move(out), {ia}, [=](Tape& tp, std::size_t o) {
    auto g = tp.grad(o);
    auto gx = tp.grad_buffer(ia);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += g[j * r + i];
  });
}

Var reshape(Var a, Dims dims) {
  Tape& t = a.tape();
  if (dims_size(dims) != a.size()) {
    throw ShapeError("reshape: " + dims_str(a.dims()) + " -> " + dims_str(dims));
  }
  Tensor out(std::move(dims), a.value().data());
  std::size_t ia = a.id();
  return t.record(std::move(out), {ia},
                  [=](Tape& tp, std::size_t o) { accumulate(tp, ia, tp.grad(o)); });
}

Var row(Var a, std::size_t r) {
  Tape& t = a.tape();
  const Tensor& av = a.value();
  if (av.rank() != 2 || r >= av.rows()) {
    throw ShapeError("row: index " + std::to_string(r) + " out of range for " + dims_str(av.dims()));
  }
  std::size_t n = av.cols();
  std::vector<double> data(av.value().begin() + r * n, av.value().begin() + (r + 1) * n);
  std::size_t ia = a.id();
  return t.record(Tensor::vector(std::move(data)), {ia}, [=](Tape& tp, std::size_t o) {
    auto g = tp.grad(o);
    auto gx = tp.grad_buffer(ia);
    for (std::size_t j = 0; j < n; ++j) gx[r * n + j] += g[j];
  });
}

Var pick(Var a, std::size_t index) {
  Tape& t = a.tape();
  if (index >= a.size()) {
    throw ShapeError("pick: index " + std::to_string(index) + " out of range for " +
                     dims_str(a.dims()));
  }
  std::size_t ia = a.id();
  return t.record(Tensor::scalar(a.value()[index]), {ia}, [=](Tape& tp, std::size_t o) {
    tp.grad_buffer(ia)[index] += tp.grad(o)[0];
  });
}

}  // namespace atn
