#pragma once

#include "mwtgc/sparse_pattern.hpp"
#include "mwtgc/types.hpp"

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace mwtgc::ad {

class Tape;

/// Handle to a node on a Tape.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

/// Records matrix operations for reverse-mode gradient accumulation. Values
/// and gradients are dense matrices; scalars are 1x1. Nodes only reference
/// earlier nodes, so reverse creation order is a valid topological order and
/// every backward sweep is deterministic.
class Tape {
public:
    /// Gradient-tracked input (parameter or differentiable signal).
    Var leaf(Matrix value);

    /// Input that never receives a gradient (data, fixed masks).
    Var constant(Matrix value);

    const Matrix& value(Var v) const { return nodes_[check(v)].value; }

    /// Gradient of the last backward() root with respect to v. Zero matrix if
    /// the node was never touched.
    Matrix grad(Var v) const;

    /// Accumulates gradients of a scalar (1x1) root into every tracked node.
    void backward(Var root);

    int size() const { return static_cast<int>(nodes_.size()); }

    // -- used by the free-function ops ---------------------------------------
    using BackwardFn = std::function<void(Tape&, int node_id)>;
    Var add_node(Matrix value, std::vector<int> parents, BackwardFn backward);
    bool requires_grad(Var v) const { return nodes_[check(v)].requires_grad; }
    Matrix& grad_buffer(int id);
    const Matrix& node_value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }

private:
    struct Node {
        Matrix value;
        Matrix grad;
        std::vector<int> parents;
        BackwardFn backward;
        bool requires_grad = false;
        bool grad_ready = false;
    };

    std::size_t check(Var v) const;

    std::vector<Node> nodes_;
};

// Elementwise nonlinearities, plain and taped.
Matrix relu(const Matrix& x);
Matrix sigmoid(const Matrix& x);
Matrix tanh(const Matrix& x);

Var relu(Tape& t, Var x);
Var sigmoid(Tape& t, Var x);
Var tanh(Tape& t, Var x);

// Linear algebra. Shapes are validated; mismatches throw std::invalid_argument
// naming both shapes.
Var matmul(Tape& t, Var a, Var b);
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var cwise_mul(Tape& t, Var a, Var b); // hadamard
Var scale(Tape& t, Var a, double s);

/// Plain hadamard product with shape checking.
Matrix hadamard(const Matrix& a, const Matrix& b);

/// a: B x K, row: 1 x K, broadcast over rows (bias add).
Var add_row_broadcast(Tape& t, Var a, Var row);

/// Horizontal concatenation; all inputs share the row count.
Var concat_cols(Tape& t, std::span<const Var> parts);

/// Sum of squared entries, as a 1x1 node.
Var sum_squares(Tape& t, Var a);

/// (a: B*n rows, f cols, groups = n) -> B x (n*f); row b*n+i lands in output
/// row b at columns [i*f, (i+1)*f). Inverse layout used by the backward pass.
Var rows_to_feature_columns(Tape& t, Var a, Index groups);

/// x: B x n -> B x (n*f) with out(b, i*f + j) = x(b, i) * w(0, j) + bias(0, j).
/// A per-node affine lift: every node gets the same f learned scalars, no
/// cross-node mixing.
Var per_node_affine(Tape& t, Var x, Var w, Var bias);

/// x: B x n batch of node signals. Computes rows (b*n + i) of the output,
/// column m holding ((values_m hadamard pattern_m) x_b)_i for each pattern
/// matrix m. `patterns` carry the fixed weighted adjacency; `value_vars` the
/// learnable per-edge parameters, one (nnz x 1) leaf per pattern. The backward
/// pass runs after the caller's frames unwind, so the patterns are shared.
Var multi_sparse_conv(Tape& t, Var x,
                      std::shared_ptr<const std::vector<SparsePatternMatrix>> patterns,
                      std::span<const Var> value_vars);

/// Loss callable contract for grad_check: returns the loss at `params` and,
/// when `grads` is non-null, fills it with the reverse-mode gradients.
using LossFn =
    std::function<double(const std::vector<Matrix>& params, std::vector<Matrix>* grads)>;

/// Central-difference verification. Returns the max over all parameter
/// entries of |g_ad - g_fd| / max(1, |g_ad|, |g_fd|). Throws NumericError on
/// a non-finite loss.
double grad_check(const LossFn& loss_fn, std::vector<Matrix> params, double epsilon);

} // namespace mwtgc::ad
