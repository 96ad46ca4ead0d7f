#include "mwtgc/autodiff.hpp"

#include "mwtgc/error.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mwtgc::ad {

namespace {

std::string shape_of(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_of(a) +
                                    " vs " + shape_of(b));
    }
}

} // namespace

std::size_t Tape::check(Var v) const {
    if (!v.valid() || v.id >= static_cast<int>(nodes_.size())) {
        throw std::invalid_argument("Tape: invalid Var handle");
    }
    return static_cast<std::size_t>(v.id);
}

Var Tape::leaf(Matrix value) {
    Node node;
    node.value = std::move(value);
    node.requires_grad = true;
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Matrix value) {
    Node node;
    node.value = std::move(value);
    node.requires_grad = false;
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::add_node(Matrix value, std::vector<int> parents, BackwardFn backward) {
    Node node;
    node.value = std::move(value);
    node.parents = std::move(parents);
    for (const int p : node.parents) {
        if (nodes_[static_cast<std::size_t>(p)].requires_grad) {
            node.requires_grad = true;
            break;
        }
    }
    if (node.requires_grad) {
        node.backward = std::move(backward);
    }
    nodes_.push_back(std::move(node));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Matrix& Tape::grad_buffer(int id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.grad_ready) {
        n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
        n.grad_ready = true;
    }
    return n.grad;
}

Matrix Tape::grad(Var v) const {
    const Node& n = nodes_[check(v)];
    if (!n.grad_ready) {
        return Matrix::Zero(n.value.rows(), n.value.cols());
    }
    return n.grad;
}

void Tape::backward(Var root) {
    const std::size_t root_id = check(root);
    const Node& r = nodes_[root_id];
    if (r.value.rows() != 1 || r.value.cols() != 1) {
        throw std::invalid_argument("Tape::backward: root must be 1x1, got " + shape_of(r.value));
    }
    for (Node& n : nodes_) {
        n.grad_ready = false;
    }
    grad_buffer(static_cast<int>(root_id))(0, 0) = 1.0;
    for (int id = static_cast<int>(root_id); id >= 0; --id) {
        Node& n = nodes_[static_cast<std::size_t>(id)];
        if (n.requires_grad && n.grad_ready && n.backward) {
            n.backward(*this, id);
        }
    }
}

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix sigmoid(const Matrix& x) {
    return ((-x.array()).exp() + 1.0).inverse();
}

Matrix tanh(const Matrix& x) { return x.array().tanh(); }

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    return a.cwiseProduct(b);
}

Var relu(Tape& t, Var x) {
    Matrix y = relu(t.value(x));
    return t.add_node(std::move(y), {x.id}, [x](Tape& tape, int id) {
        const Matrix mask = (tape.node_value(x.id).array() > 0.0).cast<double>();
        tape.grad_buffer(x.id).array() += tape.grad_buffer(id).array() * mask.array();
    });
}

Var sigmoid(Tape& t, Var x) {
    Matrix y = sigmoid(t.value(x));
    return t.add_node(std::move(y), {x.id}, [x](Tape& tape, int id) {
        const Matrix& y_val = tape.node_value(id);
        tape.grad_buffer(x.id).array() +=
            tape.grad_buffer(id).array() * y_val.array() * (1.0 - y_val.array());
    });
}

Var tanh(Tape& t, Var x) {
    Matrix y = tanh(t.value(x));
    return t.add_node(std::move(y), {x.id}, [x](Tape& tape, int id) {
        const Matrix& y_val = tape.node_value(id);
        tape.grad_buffer(x.id).array() +=
            tape.grad_buffer(id).array() * (1.0 - y_val.array().square());
    });
}

Var matmul(Tape& t, Var a, Var b) {
    const Matrix& av = t.value(a);
    const Matrix& bv = t.value(b);
    if (av.cols() != bv.rows()) {
        throw std::invalid_argument("matmul: inner dimensions differ, " + shape_of(av) + " * " +
                                    shape_of(bv));
    }
    Matrix y = av * bv;
    return t.add_node(std::move(y), {a.id, b.id}, [a, b](Tape& tape, int id) {
        const Matrix& g = tape.grad_buffer(id);
        if (tape.requires_grad(a)) {
            tape.grad_buffer(a.id).noalias() += g * tape.node_value(b.id).transpose();
        }
        if (tape.requires_grad(b)) {
            tape.grad_buffer(b.id).noalias() += tape.node_value(a.id).transpose() * g;
        }
    });
}

Var add(Tape& t, Var a, Var b) {
    require_same_shape(t.value(a), t.value(b), "add");
    Matrix y = t.value(a) + t.value(b);
    return t.add_node(std::move(y), {a.id, b.id}, [a, b](Tape& tape, int id) {
        const Matrix& g = tape.grad_buffer(id);
        if (tape.requires_grad(a)) {
            tape.grad_buffer(a.id) += g;
        }
        if (tape.requires_grad(b)) {
            tape.grad_buffer(b.id) += g;
        }
    });
}

Var sub(Tape& t, Var a, Var b) {
    require_same_shape(t.value(a), t.value(b), "sub");
    Matrix y = t.value(a) - t.value(b);
    return t.add_node(std::move(y), {a.id, b.id}, [a, b](Tape& tape, int id) {
        const Matrix& g = tape.grad_buffer(id);
        if (tape.requires_grad(a)) {
            tape.grad_buffer(a.id) += g;
        }
        if (tape.requires_grad(b)) {
            tape.grad_buffer(b.id) -= g;
        }
    });
}

Var cwise_mul(Tape& t, Var a, Var b) {
    require_same_shape(t.value(a), t.value(b), "cwise_mul");
    Matrix y = t.value(a).cwiseProduct(t.value(b));
    return t.add_node(std::move(y), {a.id, b.id}, [a, b](Tape& tape, int id) {
        const Matrix& g = tape.grad_buffer(id);
        if (tape.requires_grad(a)) {
            tape.grad_buffer(a.id).array() += g.array() * tape.node_value(b.id).array();
        }
        if (tape.requires_grad(b)) {
            tape.grad_buffer(b.id).array() += g.array() * tape.node_value(a.id).array();
        }
    });
}

Var scale(Tape& t, Var a, double s) {
    Matrix y = t.value(a) * s;
    return t.add_node(std::move(y), {a.id}, [a, s](Tape& tape, int id) {
        tape.grad_buffer(a.id) += tape.grad_buffer(id) * s;
    });
}

Var add_row_broadcast(Tape& t, Var a, Var row) {
    const Matrix& av = t.value(a);
    const Matrix& rv = t.value(row);
    if (rv.rows() != 1 || rv.cols() != av.cols()) {
        throw std::invalid_argument("add_row_broadcast: row is " + shape_of(rv) +
                                    ", expected 1x" + std::to_string(av.cols()));
    }
    Matrix y = av.rowwise() + rv.row(0);
    return t.add_node(std::move(y), {a.id, row.id}, [a, row](Tape& tape, int id) {
        const Matrix& g = tape.grad_buffer(id);
        if (tape.requires_grad(a)) {
            tape.grad_buffer(a.id) += g;
        }
        if (tape.requires_grad(row)) {
            tape.grad_buffer(row.id).row(0) += g.colwise().sum();
        }
    });
}

Var concat_cols(Tape& t, std::span<const Var> parts) {
    if (parts.empty()) {
        throw std::invalid_argument("concat_cols: no inputs");
    }
    const Index rows = t.value(parts[0]).rows();
    Index cols = 0;
    for (const Var& p : parts) {
        if (t.value(p).rows() != rows) {
            throw std::invalid_argument("concat_cols: row counts differ");
        }
        cols += t.value(p).cols();
    }
    Matrix y(rows, cols);
    std::vector<int> parents;
    std::vector<Index> offsets;
    Index at = 0;
    for (const Var& p : parts) {
        const Matrix& pv = t.value(p);
        y.middleCols(at, pv.cols()) = pv;
        parents.push_back(p.id);
        offsets.push_back(at);
        at += pv.cols();
    }
    std::vector<Var> part_vec(parts.begin(), parts.end());
    return t.add_node(std::move(y), std::move(parents),
                      [part_vec, offsets](Tape& tape, int id) {
                          const Matrix& g = tape.grad_buffer(id);
                          for (std::size_t i = 0; i < part_vec.size(); ++i) {
                              const Var p = part_vec[i];
                              if (tape.requires_grad(p)) {
                                  const Index width = tape.node_value(p.id).cols();
                                  tape.grad_buffer(p.id) += g.middleCols(offsets[i], width);
                              }
                          }
                      });
}

Var sum_squares(Tape& t, Var a) {
    Matrix y(1, 1);
    y(0, 0) = t.value(a).squaredNorm();
    return t.add_node(std::move(y), {a.id}, [a](Tape& tape, int id) {
        const double g = tape.grad_buffer(id)(0, 0);
        tape.grad_buffer(a.id) += 2.0 * g * tape.node_value(a.id);
    });
}

Var rows_to_feature_columns(Tape& t, Var a, Index groups) {
    const Matrix& av = t.value(a);
    if (groups <= 0 || av.rows() % groups != 0) {
        throw std::invalid_argument("rows_to_feature_columns: " + std::to_string(av.rows()) +
                                    " rows not divisible into " + std::to_string(groups) +
                                    " groups");
    }
    const Index batch = av.rows() / groups;
    const Index f = av.cols();
    Matrix y(batch, groups * f);
    for (Index b = 0; b < batch; ++b) {
        for (Index i = 0; i < groups; ++i) {
            y.block(b, i * f, 1, f) = av.row(b * groups + i);
        }
    }
    return t.add_node(std::move(y), {a.id}, [a, groups, batch, f](Tape& tape, int id) {
        const Matrix& g = tape.grad_buffer(id);
        Matrix& ga = tape.grad_buffer(a.id);
        for (Index b = 0; b < batch; ++b) {
            for (Index i = 0; i < groups; ++i) {
                ga.row(b * groups + i) += g.block(b, i * f, 1, f);
            }
        }
    });
}

Var per_node_affine(Tape& t, Var x, Var w, Var bias) {
    const Matrix& xv = t.value(x);
    const Matrix& wv = t.value(w);
    const Matrix& bv = t.value(bias);
    if (wv.rows() != 1 || bv.rows() != 1 || wv.cols() != bv.cols()) {
        throw std::invalid_argument("per_node_affine: w and bias must be matching 1 x f rows");
    }
    const Index batch = xv.rows();
    const Index n = xv.cols();
    const Index f = wv.cols();
    Matrix y(batch, n * f);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < f; ++j) {
            y.col(i * f + j) = xv.col(i) * wv(0, j) + Vector::Constant(batch, bv(0, j));
        }
    }
    return t.add_node(std::move(y), {x.id, w.id, bias.id},
                      [x, w, bias, n, f](Tape& tape, int id) {
                          const Matrix& g = tape.grad_buffer(id);
                          const Matrix& xv = tape.node_value(x.id);
                          const Matrix& wv = tape.node_value(w.id);
                          for (Index i = 0; i < n; ++i) {
                              for (Index j = 0; j < f; ++j) {
                                  const auto gcol = g.col(i * f + j);
                                  if (tape.requires_grad(x)) {
                                      tape.grad_buffer(x.id).col(i) += gcol * wv(0, j);
                                  }
                                  if (tape.requires_grad(w)) {
                                      tape.grad_buffer(w.id)(0, j) += gcol.dot(xv.col(i));
                                  }
                                  if (tape.requires_grad(bias)) {
                                      tape.grad_buffer(bias.id)(0, j) += gcol.sum();
                                  }
                              }
                          }
                      });
}

Var multi_sparse_conv(Tape& t, Var x,
                      std::shared_ptr<const std::vector<SparsePatternMatrix>> patterns,
                      std::span<const Var> value_vars) {
    if (patterns == nullptr || patterns->size() != value_vars.size()) {
        throw std::invalid_argument("multi_sparse_conv: pattern/value count mismatch");
    }
    const Matrix& xv = t.value(x);
    const Index batch = xv.rows();
    const Index n = xv.cols();
    const Index m_count = static_cast<Index>(patterns->size());
    for (std::size_t m = 0; m < patterns->size(); ++m) {
        const SparsePatternMatrix& pat = (*patterns)[m];
        if (pat.rows() != n || pat.cols() != n) {
            throw std::invalid_argument("multi_sparse_conv: pattern " + std::to_string(m) +
                                        " is " + std::to_string(pat.rows()) + "x" +
                                        std::to_string(pat.cols()) + ", expected " +
                                        std::to_string(n) + "x" + std::to_string(n));
        }
        const Matrix& vals = t.value(value_vars[m]);
        if (vals.rows() != pat.nnz() || vals.cols() != 1) {
            throw std::invalid_argument("multi_sparse_conv: value vector " + std::to_string(m) +
                                        " does not match the pattern nnz");
        }
    }

    Matrix y = Matrix::Zero(batch * n, m_count);
    for (Index m = 0; m < m_count; ++m) {
        const SparsePatternMatrix& pat = (*patterns)[static_cast<std::size_t>(m)];
        const Matrix& vals = t.value(value_vars[static_cast<std::size_t>(m)]);
        const auto& rows = pat.row_indices();
        const auto& cols = pat.col_indices();
        const Vector& wt = pat.values();
        for (Index k = 0; k < pat.nnz(); ++k) {
            const double w = vals(k, 0) * wt[k];
            const Index i = rows[static_cast<std::size_t>(k)];
            const Index j = cols[static_cast<std::size_t>(k)];
            for (Index b = 0; b < batch; ++b) {
                y(b * n + i, m) += w * xv(b, j);
            }
        }
    }

    std::vector<int> parents{x.id};
    for (const Var& v : value_vars) {
        parents.push_back(v.id);
    }
    std::vector<Var> value_vec(value_vars.begin(), value_vars.end());
    return t.add_node(
        std::move(y), std::move(parents),
        [x, patterns, value_vec, batch, n](Tape& tape, int id) {
            const Matrix& g = tape.grad_buffer(id);
            const Matrix& xv = tape.node_value(x.id);
            const bool x_grad = tape.requires_grad(x);
            Matrix* gx = x_grad ? &tape.grad_buffer(x.id) : nullptr;
            for (std::size_t m = 0; m < patterns->size(); ++m) {
                const SparsePatternMatrix& pat = (*patterns)[m];
                const Matrix& vals = tape.node_value(value_vec[m].id);
                const bool v_grad = tape.requires_grad(value_vec[m]);
                Matrix* gv = v_grad ? &tape.grad_buffer(value_vec[m].id) : nullptr;
                const auto& rows = pat.row_indices();
                const auto& cols = pat.col_indices();
                const Vector& wt = pat.values();
                for (Index k = 0; k < pat.nnz(); ++k) {
                    const Index i = rows[static_cast<std::size_t>(k)];
                    const Index j = cols[static_cast<std::size_t>(k)];
                    double dv = 0.0;
                    const double w = wt[k];
                    const double v = vals(k, 0);
                    for (Index b = 0; b < batch; ++b) {
                        const double go = g(b * n + i, static_cast<Index>(m));
                        dv += go * w * xv(b, j);
                        if (gx != nullptr) {
                            (*gx)(b, j) += go * w * v;
                        }
                    }
                    if (gv != nullptr) {
                        (*gv)(k, 0) += dv;
                    }
                }
            }
        });
}

double grad_check(const LossFn& loss_fn, std::vector<Matrix> params, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("grad_check: epsilon must be positive");
    }
    std::vector<Matrix> analytic;
    const double base = loss_fn(params, &analytic);
    if (!std::isfinite(base)) {
        throw NumericError("grad_check: loss is not finite at the evaluation point");
    }
    if (analytic.size() != params.size()) {
        throw std::invalid_argument("grad_check: gradient count differs from parameter count");
    }
    double max_rel = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        if (analytic[p].rows() != params[p].rows() || analytic[p].cols() != params[p].cols()) {
            throw std::invalid_argument("grad_check: gradient " + std::to_string(p) +
                                        " has the wrong shape");
        }
        for (Index r = 0; r < params[p].rows(); ++r) {
            for (Index c = 0; c < params[p].cols(); ++c) {
                const double saved = params[p](r, c);
                params[p](r, c) = saved + epsilon;
                const double up = loss_fn(params, nullptr);
                params[p](r, c) = saved - epsilon;
                const double down = loss_fn(params, nullptr);
                params[p](r, c) = saved;
                if (!std::isfinite(up) || !std::isfinite(down)) {
                    throw NumericError("grad_check: non-finite loss during finite differences");
                }
                const double fd = (up - down) / (2.0 * epsilon);
                const double adg = analytic[p](r, c);
                const double rel =
                    std::fabs(adg - fd) / std::max({1.0, std::fabs(adg), std::fabs(fd)});
                max_rel = std::max(max_rel, rel);
            }
        }
    }
    return max_rel;
}

} // namespace mwtgc::ad
