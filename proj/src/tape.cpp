#include "rce/tape.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rce {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " + a.shape_str() +
                              " and " + b.shape_str());
}

void require_finite(const char* op, const Tensor& t) {
  if (!t.all_finite())
    throw std::domain_error(std::string(op) + ": non-finite input value");
}

}  // namespace

Var Tape::push(Tensor value, bool needs_grad, std::function<void(Tape&, Node&)> back) {
  Node n;
  n.value = std::make_shared<const Tensor>(std::move(value));
  n.needs_grad = needs_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Tensor& Tape::grad_buf(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad = Tensor::zeros(n.value->shape());
  return n.grad;
}

void Tape::add_grad(int id, const Tensor& g) {
  if (!nodes_[id].needs_grad) return;
  Tensor& gb = grad_buf(id);
  const double* src = g.data();
  double* dst = gb.data();
  for (std::size_t i = 0; i < gb.size(); ++i) dst[i] += src[i];
}

Var Tape::constant(Tensor v) { return push(std::move(v), false, nullptr); }

Var Tape::constant_ref(const Tensor* v) {
  Node n;
  n.value = std::shared_ptr<const Tensor>(v, [](const Tensor*) {});
  n.needs_grad = false;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Tensor v) { return push(std::move(v), true, nullptr); }

Var Tape::param(Parameter& p) {
  auto it = param_ids_.find(&p);
  if (it != param_ids_.end()) return Var{it->second};
  Node n;
  n.value = std::shared_ptr<const Tensor>(&p.value, [](const Tensor*) {});
  n.needs_grad = true;
  n.bound = &p;
  nodes_.push_back(std::move(n));
  int id = static_cast<int>(nodes_.size()) - 1;
  param_ids_.emplace(&p, id);
  return Var{id};
}

void Tape::backward(Var loss) {
  Node& ln = node(loss);
  if (ln.value->size() != 1)
    throw std::invalid_argument("backward: loss must be a scalar, got " + ln.value->shape_str());
  if (!ln.needs_grad) return;
  grad_buf(loss.id)[0] += 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.back) n.back(*this, n);
    if (n.bound) {
      double* dst = n.bound->grad.data();
      const double* src = n.grad.data();
      for (std::size_t k = 0; k < n.grad.size(); ++k) dst[k] += src[k];
    }
  }
}

// ---------------------------------------------------------------------------
// Elementwise

Var Tape::add(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv)) shape_error("add", av, bv);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  bool ng = node(a).needs_grad || node(b).needs_grad;
  int aid = a.id, bid = b.id;
  return push(std::move(out), ng, [aid, bid](Tape& t, Node& self) {
    t.add_grad(aid, self.grad);
    t.add_grad(bid, self.grad);
  });
}

Var Tape::sub(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv)) shape_error("sub", av, bv);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  bool ng = node(a).needs_grad || node(b).needs_grad;
  int aid = a.id, bid = b.id;
  return push(std::move(out), ng, [aid, bid](Tape& t, Node& self) {
    t.add_grad(aid, self.grad);
    if (t.nodes_[bid].needs_grad) {
      Tensor& gb = t.grad_buf(bid);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= self.grad[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv)) shape_error("mul", av, bv);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  bool ng = node(a).needs_grad || node(b).needs_grad;
  int aid = a.id, bid = b.id;
  return push(std::move(out), ng, [aid, bid](Tape& t, Node& self) {
    const Tensor& av2 = *t.nodes_[aid].value;
    const Tensor& bv2 = *t.nodes_[bid].value;
    if (t.nodes_[aid].needs_grad) {
      Tensor& ga = t.grad_buf(aid);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i] * bv2[i];
    }
    if (t.nodes_[bid].needs_grad) {
      Tensor& gb = t.grad_buf(bid);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += self.grad[i] * av2[i];
    }
  });
}

Var Tape::neg(Var a) {
  const Tensor& av = value(a);
  require_finite("neg", av);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -av[i];
  int aid = a.id;
  return push(std::move(out), node(a).needs_grad, [aid](Tape& t, Node& self) {
    if (!t.nodes_[aid].needs_grad) return;
    Tensor& ga = t.grad_buf(aid);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] -= self.grad[i];
  });
}

Var Tape::scale(Var a, double c) {
  const Tensor& av = value(a);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * av[i];
  int aid = a.id;
  return push(std::move(out), node(a).needs_grad, [aid, c](Tape& t, Node& self) {
    if (!t.nodes_[aid].needs_grad) return;
    Tensor& ga = t.grad_buf(aid);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += c * self.grad[i];
  });
}

Var Tape::sigmoid(Var a) {
  const Tensor& av = value(a);
  require_finite("sigmoid", av);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(av[i]);
  int aid = a.id;
  int self_id = static_cast<int>(nodes_.size());
  return push(std::move(out), node(a).needs_grad, [aid, self_id](Tape& t, Node& self) {
    if (!t.nodes_[aid].needs_grad) return;
    const Tensor& y = *t.nodes_[self_id].value;
    Tensor& ga = t.grad_buf(aid);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i] * y[i] * (1.0 - y[i]);
  });
}

Var Tape::tanh(Var a) {
  const Tensor& av = value(a);
  require_finite("tanh", av);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(av[i]);
  int aid = a.id;
  int self_id = static_cast<int>(nodes_.size());
  return push(std::move(out), node(a).needs_grad, [aid, self_id](Tape& t, Node& self) {
    if (!t.nodes_[aid].needs_grad) return;
    const Tensor& y = *t.nodes_[self_id].value;
    Tensor& ga = t.grad_buf(aid);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i] * (1.0 - y[i] * y[i]);
  });
}

Var Tape::relu(Var a) {
  const Tensor& av = value(a);
  require_finite("relu", av);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] > 0.0 ? av[i] : 0.0;
  int aid = a.id;
  return push(std::move(out), node(a).needs_grad, [aid](Tape& t, Node& self) {
    if (!t.nodes_[aid].needs_grad) return;
    const Tensor& x = *t.nodes_[aid].value;
    Tensor& ga = t.grad_buf(aid);
    for (std::size_t i = 0; i < ga.size(); ++i)
      if (x[i] > 0.0) ga[i] += self.grad[i];
  });
}

Var Tape::exp(Var a) {
  const Tensor& av = value(a);
  require_finite("exp", av);
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(av[i]);
    if (!std::isfinite(out[i])) throw std::domain_error("exp: overflow to non-finite value");
  }
  int aid = a.id;
  int self_id = static_cast<int>(nodes_.size());
  return push(std::move(out), node(a).needs_grad, [aid, self_id](Tape& t, Node& self) {
    if (!t.nodes_[aid].needs_grad) return;
    const Tensor& y = *t.nodes_[self_id].value;
    Tensor& ga = t.grad_buf(aid);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i] * y[i];
  });
}

// ---------------------------------------------------------------------------
// Linear algebra

Var Tape::matmul(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rank() != 2) shape_error("matmul", av, bv);
  int r = av.dim(0), c = av.dim(1);
  int aid = a.id, bid = b.id;
  bool ng = node(a).needs_grad || node(b).needs_grad;

  if (bv.rank() == 1) {
    if (bv.dim(0) != c) shape_error("matmul", av, bv);
    Tensor out({r});
    const double* A = av.data();
    const double* x = bv.data();
    for (int i = 0; i < r; ++i) {
      const double* arow = A + static_cast<std::size_t>(i) * c;
      double acc = 0.0;
      for (int l = 0; l < c; ++l) acc += arow[l] * x[l];
      out[i] = acc;
    }
    return push(std::move(out), ng, [aid, bid, r, c](Tape& t, Node& self) {
      const double* g = self.grad.data();
      const Tensor& A2 = *t.nodes_[aid].value;
      const Tensor& x2 = *t.nodes_[bid].value;
      if (t.nodes_[aid].needs_grad) {
        Tensor& ga = t.grad_buf(aid);
        for (int i = 0; i < r; ++i) {
          double gi = g[i];
          if (gi == 0.0) continue;
          double* garow = ga.data() + static_cast<std::size_t>(i) * c;
          const double* x = x2.data();
          for (int l = 0; l < c; ++l) garow[l] += gi * x[l];
        }
      }
      if (t.nodes_[bid].needs_grad) {
        Tensor& gb = t.grad_buf(bid);
        for (int i = 0; i < r; ++i) {
          double gi = g[i];
          if (gi == 0.0) continue;
          const double* arow = A2.data() + static_cast<std::size_t>(i) * c;
          for (int l = 0; l < c; ++l) gb[l] += gi * arow[l];
        }
      }
    });
  }

  if (bv.rank() != 2 || bv.dim(0) != c) shape_error("matmul", av, bv);
  int k = bv.dim(1);
  Tensor out({r, k});
  {
    const double* A = av.data();
    const double* B = bv.data();
    double* C = out.data();
    for (int i = 0; i < r; ++i)
      for (int l = 0; l < c; ++l) {
        double ail = A[static_cast<std::size_t>(i) * c + l];
        if (ail == 0.0) continue;
        const double* brow = B + static_cast<std::size_t>(l) * k;
        double* crow = C + static_cast<std::size_t>(i) * k;
        for (int j = 0; j < k; ++j) crow[j] += ail * brow[j];
      }
  }
  return push(std::move(out), ng, [aid, bid, r, c, k](Tape& t, Node& self) {
    const Tensor& A2 = *t.nodes_[aid].value;
    const Tensor& B2 = *t.nodes_[bid].value;
    const double* G = self.grad.data();
    if (t.nodes_[aid].needs_grad) {
      Tensor& ga = t.grad_buf(aid);  // dA = G * B^T
      for (int i = 0; i < r; ++i)
        for (int l = 0; l < c; ++l) {
          const double* grow = G + static_cast<std::size_t>(i) * k;
          const double* brow = B2.data() + static_cast<std::size_t>(l) * k;
          double acc = 0.0;
          for (int j = 0; j < k; ++j) acc += grow[j] * brow[j];
          ga.data()[static_cast<std::size_t>(i) * c + l] += acc;
        }
    }
    if (t.nodes_[bid].needs_grad) {
      Tensor& gb = t.grad_buf(bid);  // dB = A^T * G
      for (int i = 0; i < r; ++i)
        for (int l = 0; l < c; ++l) {
          double ail = A2.data()[static_cast<std::size_t>(i) * c + l];
          if (ail == 0.0) continue;
          const double* grow = G + static_cast<std::size_t>(i) * k;
          double* gbrow = gb.data() + static_cast<std::size_t>(l) * k;
          for (int j = 0; j < k; ++j) gbrow[j] += ail * grow[j];
        }
    }
  });
}

Var Tape::matvec_t(Var m, Var v) {
  const Tensor& mv = value(m);
  const Tensor& vv = value(v);
  if (mv.rank() != 2 || vv.rank() != 1 || vv.dim(0) != mv.dim(0)) shape_error("matvec_t", mv, vv);
  int r = mv.dim(0), c = mv.dim(1);
  Tensor out({c});
  for (int i = 0; i < r; ++i) {
    double xi = vv[i];
    if (xi == 0.0) continue;
    const double* mrow = mv.data() + static_cast<std::size_t>(i) * c;
    for (int j = 0; j < c; ++j) out[j] += xi * mrow[j];
  }
  bool ng = node(m).needs_grad || node(v).needs_grad;
  int mid = m.id, vid = v.id;
  return push(std::move(out), ng, [mid, vid, r, c](Tape& t, Node& self) {
    const Tensor& M2 = *t.nodes_[mid].value;
    const Tensor& x2 = *t.nodes_[vid].value;
    const double* g = self.grad.data();
    if (t.nodes_[mid].needs_grad) {
      Tensor& gm = t.grad_buf(mid);
      for (int i = 0; i < r; ++i) {
        double xi = x2[i];
        if (xi == 0.0) continue;
        double* gmrow = gm.data() + static_cast<std::size_t>(i) * c;
        for (int j = 0; j < c; ++j) gmrow[j] += xi * g[j];
      }
    }
    if (t.nodes_[vid].needs_grad) {
      Tensor& gv = t.grad_buf(vid);
      for (int i = 0; i < r; ++i) {
        const double* mrow = M2.data() + static_cast<std::size_t>(i) * c;
        double acc = 0.0;
        for (int j = 0; j < c; ++j) acc += mrow[j] * g[j];
        gv[i] += acc;
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Shape plumbing

Var Tape::concat(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (av.rank() != 1 || bv.rank() != 1) shape_error("concat", av, bv);
  int p = av.dim(0), q = bv.dim(0);
  Tensor out({p + q});
  for (int i = 0; i < p; ++i) out[i] = av[i];
  for (int i = 0; i < q; ++i) out[p + i] = bv[i];
  bool ng = node(a).needs_grad || node(b).needs_grad;
  int aid = a.id, bid = b.id;
  return push(std::move(out), ng, [aid, bid, p, q](Tape& t, Node& self) {
    if (t.nodes_[aid].needs_grad) {
      Tensor& ga = t.grad_buf(aid);
      for (int i = 0; i < p; ++i) ga[i] += self.grad[i];
    }
    if (t.nodes_[bid].needs_grad) {
      Tensor& gb = t.grad_buf(bid);
      for (int i = 0; i < q; ++i) gb[i] += self.grad[p + i];
    }
  });
}

Var Tape::slice(Var a, int offset, int len) {
  const Tensor& av = value(a);
  if (av.rank() != 1 || offset < 0 || len <= 0 || offset + len > av.dim(0))
    throw std::invalid_argument("slice: range [" + std::to_string(offset) + "," +
                                std::to_string(offset + len) + ") out of bounds for " +
                                av.shape_str());
  Tensor out({len});
  for (int i = 0; i < len; ++i) out[i] = av[offset + i];
  int aid = a.id;
  return push(std::move(out), node(a).needs_grad, [aid, offset, len](Tape& t, Node& self) {
    if (!t.nodes_[aid].needs_grad) return;
    Tensor& ga = t.grad_buf(aid);
    for (int i = 0; i < len; ++i) ga[offset + i] += self.grad[i];
  });
}

Var Tape::row(Var m, int i) {
  const Tensor& mv = value(m);
  if (mv.rank() != 2 || i < 0 || i >= mv.dim(0))
    throw std::invalid_argument("row: index " + std::to_string(i) + " out of range for " +
                                mv.shape_str());
  int c = mv.dim(1);
  Tensor out({c});
  const double* src = mv.data() + static_cast<std::size_t>(i) * c;
  for (int j = 0; j < c; ++j) out[j] = src[j];
  int mid = m.id;
  return push(std::move(out), node(m).needs_grad, [mid, i, c](Tape& t, Node& self) {
    if (!t.nodes_[mid].needs_grad) return;
    Tensor& gm = t.grad_buf(mid);
    double* dst = gm.data() + static_cast<std::size_t>(i) * c;
    for (int j = 0; j < c; ++j) dst[j] += self.grad[j];
  });
}

Var Tape::rows(Var m, std::vector<int> idx) {
  const Tensor& mv = value(m);
  if (mv.rank() != 2) throw std::invalid_argument("rows: matrix required, got " + mv.shape_str());
  int c = mv.dim(1);
  int k = static_cast<int>(idx.size());
  if (k == 0) throw std::invalid_argument("rows: empty index list");
  for (int i : idx)
    if (i < 0 || i >= mv.dim(0))
      throw std::invalid_argument("rows: index " + std::to_string(i) + " out of range");
  Tensor out({k, c});
  for (int s = 0; s < k; ++s) {
    const double* src = mv.data() + static_cast<std::size_t>(idx[s]) * c;
    double* dst = out.data() + static_cast<std::size_t>(s) * c;
    for (int j = 0; j < c; ++j) dst[j] = src[j];
  }
  int mid = m.id;
  return push(std::move(out), node(m).needs_grad,
              [mid, idx = std::move(idx), c](Tape& t, Node& self) {
                if (!t.nodes_[mid].needs_grad) return;
                Tensor& gm = t.grad_buf(mid);
                for (std::size_t s = 0; s < idx.size(); ++s) {
                  const double* src = self.grad.data() + s * c;
                  double* dst = gm.data() + static_cast<std::size_t>(idx[s]) * c;
                  for (int j = 0; j < c; ++j) dst[j] += src[j];
                }
              });
}

Var Tape::sum_cols(Var m) {
  const Tensor& mv = value(m);
  if (mv.rank() != 2)
    throw std::invalid_argument("sum_cols: matrix required, got " + mv.shape_str());
  int r = mv.dim(0), c = mv.dim(1);
  Tensor out({r});
  for (int i = 0; i < r; ++i) {
    const double* src = mv.data() + static_cast<std::size_t>(i) * c;
    double acc = 0.0;
    for (int j = 0; j < c; ++j) acc += src[j];
    out[i] = acc;
  }
  int mid = m.id;
  return push(std::move(out), node(m).needs_grad, [mid, r, c](Tape& t, Node& self) {
    if (!t.nodes_[mid].needs_grad) return;
    Tensor& gm = t.grad_buf(mid);
    for (int i = 0; i < r; ++i) {
      double gi = self.grad[i];
      if (gi == 0.0) continue;
      double* dst = gm.data() + static_cast<std::size_t>(i) * c;
      for (int j = 0; j < c; ++j) dst[j] += gi;
    }
  });
}

Var Tape::stack_rows(const std::vector<Var>& vs) {
  if (vs.empty()) throw std::invalid_argument("stack_rows: empty input");
  int c = value(vs[0]).dim(0);
  bool ng = false;
  for (Var v : vs) {
    const Tensor& t = value(v);
    if (t.rank() != 1 || t.dim(0) != c)
      throw std::invalid_argument("stack_rows: inconsistent vector shapes");
    ng = ng || node(v).needs_grad;
  }
  int k = static_cast<int>(vs.size());
  Tensor out({k, c});
  for (int s = 0; s < k; ++s) {
    const Tensor& t = value(vs[s]);
    double* dst = out.data() + static_cast<std::size_t>(s) * c;
    for (int j = 0; j < c; ++j) dst[j] = t[j];
  }
  std::vector<int> ids(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) ids[i] = vs[i].id;
  return push(std::move(out), ng, [ids = std::move(ids), c](Tape& t, Node& self) {
    for (std::size_t s = 0; s < ids.size(); ++s) {
      if (!t.nodes_[ids[s]].needs_grad) continue;
      Tensor& g = t.grad_buf(ids[s]);
      const double* src = self.grad.data() + s * c;
      for (int j = 0; j < c; ++j) g[j] += src[j];
    }
  });
}

Var Tape::stack_scalars(const std::vector<Var>& vs) {
  if (vs.empty()) throw std::invalid_argument("stack_scalars: empty input");
  bool ng = false;
  for (Var v : vs) {
    if (value(v).size() != 1) throw std::invalid_argument("stack_scalars: inputs must be scalars");
    ng = ng || node(v).needs_grad;
  }
  Tensor out({static_cast<int>(vs.size())});
  for (std::size_t i = 0; i < vs.size(); ++i) out[i] = value(vs[i])[0];
  std::vector<int> ids(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) ids[i] = vs[i].id;
  return push(std::move(out), ng, [ids = std::move(ids)](Tape& t, Node& self) {
    for (std::size_t s = 0; s < ids.size(); ++s) {
      if (!t.nodes_[ids[s]].needs_grad) continue;
      t.grad_buf(ids[s])[0] += self.grad[s];
    }
  });
}

// ---------------------------------------------------------------------------
// Reductions, softmax, dropout, losses

Var Tape::sum(Var a) {
  const Tensor& av = value(a);
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i];
  int aid = a.id;
  return push(Tensor::scalar(acc), node(a).needs_grad, [aid](Tape& t, Node& self) {
    if (!t.nodes_[aid].needs_grad) return;
    Tensor& ga = t.grad_buf(aid);
    double g = self.grad[0];
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Var Tape::mean(Var a) {
  const Tensor& av = value(a);
  double n = static_cast<double>(av.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) acc += av[i];
  int aid = a.id;
  return push(Tensor::scalar(acc / n), node(a).needs_grad, [aid, n](Tape& t, Node& self) {
    if (!t.nodes_[aid].needs_grad) return;
    Tensor& ga = t.grad_buf(aid);
    double g = self.grad[0] / n;
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Var Tape::softmax(Var a) {
  const Tensor& av = value(a);
  if (av.rank() != 1 || av.dim(0) < 1)
    throw std::invalid_argument("softmax: non-empty vector required, got " + av.shape_str());
  require_finite("softmax", av);
  double mx = av[0];
  for (std::size_t i = 1; i < av.size(); ++i) mx = std::max(mx, av[i]);
  Tensor out(av.shape());
  double z = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    out[i] = std::exp(av[i] - mx);
    z += out[i];
  }
  for (std::size_t i = 0; i < av.size(); ++i) out[i] /= z;
  int aid = a.id;
  int self_id = static_cast<int>(nodes_.size());
  return push(std::move(out), node(a).needs_grad, [aid, self_id](Tape& t, Node& self) {
    if (!t.nodes_[aid].needs_grad) return;
    const Tensor& y = *t.nodes_[self_id].value;
    Tensor& ga = t.grad_buf(aid);
    double dot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dot += self.grad[i] * y[i];
    for (std::size_t i = 0; i < y.size(); ++i) ga[i] += y[i] * (self.grad[i] - dot);
  });
}

Var Tape::dropout(Var a, double rate, bool training, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0)
    throw std::invalid_argument("dropout: rate must be in [0,1), got " + std::to_string(rate));
  if (!training || rate == 0.0) return a;
  const Tensor& av = value(a);
  Tensor mask(av.shape());
  double keep_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = rng.bernoulli(rate) ? 0.0 : keep_scale;
  Tensor out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * mask[i];
  int aid = a.id;
  return push(std::move(out), node(a).needs_grad,
              [aid, mask = std::move(mask)](Tape& t, Node& self) {
                if (!t.nodes_[aid].needs_grad) return;
                Tensor& ga = t.grad_buf(aid);
                for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i] * mask[i];
              });
}

Var Tape::bce_with_logits(Var logits, const Tensor& targets, const Tensor& weights) {
  const Tensor& x = value(logits);
  if (!x.same_shape(targets)) shape_error("bce_with_logits(targets)", x, targets);
  if (!x.same_shape(weights)) shape_error("bce_with_logits(weights)", x, weights);
  require_finite("bce_with_logits", x);
  double wsum = 0.0;
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double xi = x[i];
    double li = std::max(xi, 0.0) - xi * targets[i] + std::log1p(std::exp(-std::abs(xi)));
    loss += weights[i] * li;
    wsum += weights[i];
  }
  if (wsum <= 0.0) throw std::invalid_argument("bce_with_logits: weights must sum to > 0");
  loss /= wsum;
  int xid = logits.id;
  return push(Tensor::scalar(loss), node(logits).needs_grad,
              [xid, targets, weights, wsum](Tape& t, Node& self) {
                if (!t.nodes_[xid].needs_grad) return;
                const Tensor& x2 = *t.nodes_[xid].value;
                Tensor& gx = t.grad_buf(xid);
                double g = self.grad[0] / wsum;
                for (std::size_t i = 0; i < gx.size(); ++i)
                  gx[i] += g * weights[i] * (stable_sigmoid(x2[i]) - targets[i]);
              });
}

Var Tape::bce_with_logits(Var logits, const Tensor& targets) {
  return bce_with_logits(logits, targets, Tensor::full(value(logits).shape(), 1.0));
}

Var Tape::l2_distance(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (!av.same_shape(bv)) shape_error("l2_distance", av, bv);
  double ss = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    double d = av[i] - bv[i];
    ss += d * d;
  }
  double dist = std::sqrt(ss);
  bool ng = node(a).needs_grad || node(b).needs_grad;
  int aid = a.id, bid = b.id;
  // Gradient at coincident inputs is undefined; it is left at zero, which
  // training never hits (random real-valued encodings collide with
  // probability zero).
  return push(Tensor::scalar(dist), ng, [aid, bid, dist](Tape& t, Node& self) {
    if (dist == 0.0) return;
    const Tensor& av2 = *t.nodes_[aid].value;
    const Tensor& bv2 = *t.nodes_[bid].value;
    double g = self.grad[0] / dist;
    if (t.nodes_[aid].needs_grad) {
      Tensor& ga = t.grad_buf(aid);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * (av2[i] - bv2[i]);
    }
    if (t.nodes_[bid].needs_grad) {
      Tensor& gb = t.grad_buf(bid);
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g * (av2[i] - bv2[i]);
    }
  });
}

}  // namespace rce
