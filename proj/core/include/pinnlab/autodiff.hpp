#pragma once

// Scalar reverse-mode automatic differentiation.
//
// A Tape records one node per scalar operation in evaluation order, so every
// operand index is strictly smaller than the index of its consumer. Values are
// computed eagerly while the graph is built; backward() performs a single
// reverse sweep. Time derivatives of network outputs are carried forward as
// Taylor2 triples whose channels are ordinary tape nodes, which lets one
// backward pass differentiate losses that contain v, dv/dt and d2v/dt2.

#include <cstdint>
#include <span>
#include <vector>

namespace pinnlab::ad {

struct NodeRef {
    std::uint32_t index = 0;

    friend bool operator==(NodeRef, NodeRef) = default;
};

enum class Op : std::uint8_t {
    leaf,
    constant,
    add,
    sub,
    mul,
    div,
    neg,
    square,
    tanh,
    sigmoid,
    exp,
    dot,      // sum_k a_k * b_k over two operand lists
    dot_run,  // dot with the left operands a contiguous index run
    sum,      // sum_k a_k over an operand list
};

/// Adjoints of a root with respect to every trainable leaf on a tape.
///
/// Entries are ordered by leaf registration order. Constants never appear.
class Gradient {
public:
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] bool empty() const noexcept { return values_.empty(); }

    /// True when `node` is a leaf of the tape this gradient came from.
    [[nodiscard]] bool contains(NodeRef node) const noexcept;

    /// d(root)/d(leaf). Throws ConfigError when `leaf` is not a trainable leaf.
    [[nodiscard]] double operator[](NodeRef leaf) const;

    /// Gradient entries in leaf registration order.
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

private:
    friend class Tape;
    std::vector<double> values_;
    std::vector<std::uint32_t> leaf_nodes_;
};

class Tape {
public:
    Tape() = default;

    /// Drops all nodes but keeps allocated capacity for the next rebuild.
    void clear() noexcept;
    void reserve(std::size_t nodes, std::size_t operands);

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] std::size_t leaf_count() const noexcept { return leaf_nodes_.size(); }

    [[nodiscard]] double value(NodeRef n) const { return values_[n.index]; }
    [[nodiscard]] Op op(NodeRef n) const { return records_[n.index].op; }
    [[nodiscard]] bool is_leaf(NodeRef n) const { return records_[n.index].op == Op::leaf; }
    /// Every node `n` reads, in operand order.
    [[nodiscard]] std::vector<NodeRef> operands(NodeRef n) const;

    NodeRef leaf(double value);
    NodeRef constant(double value);

    NodeRef add(NodeRef a, NodeRef b);
    NodeRef sub(NodeRef a, NodeRef b);
    NodeRef mul(NodeRef a, NodeRef b);
    NodeRef div(NodeRef a, NodeRef b);
    NodeRef neg(NodeRef a);
    NodeRef square(NodeRef a);

    NodeRef tanh(NodeRef a);
    NodeRef sigmoid(NodeRef a);
    NodeRef exp(NodeRef a);

    /// sum_k lhs[k] * rhs[k]; the spans must have equal length.
    NodeRef dot(std::span<const NodeRef> lhs, std::span<const NodeRef> rhs);
    /// Same as dot() with the left operands given as a contiguous run of
    /// node indices starting at `lhs_first`.
    NodeRef dot(NodeRef lhs_first, std::span<const NodeRef> rhs);
    NodeRef sum(std::span<const NodeRef> terms);

    /// Reverse sweep from `root`. Adjoints accumulate additively at shared
    /// nodes. Throws NumericError naming the node on a non-finite adjoint.
    Gradient backward(NodeRef root);

private:
    struct Record {
        Op op;
        std::uint32_t a;
        std::uint32_t b;
        std::uint32_t c;
    };

    NodeRef push(Op op, std::uint32_t a, std::uint32_t b, std::uint32_t c, double value);
    void check_operand(NodeRef n) const;

    std::vector<double> values_;
    std::vector<Record> records_;
    std::vector<std::uint32_t> operands_;
    std::vector<std::uint32_t> leaf_nodes_;
    std::vector<double> adjoint_;
};

/// A value with its first and second derivative with respect to time.
/// v1 is in units of the carried quantity per second, v2 per second squared.
struct Taylor2 {
    NodeRef v0;
    NodeRef v1;
    NodeRef v2;
};

/// Lifts the time coordinate: (t, 1, 0).
Taylor2 t2_input(Tape& tape, double t);

/// (w*x0 + b, w*x1, w*x2).
Taylor2 t2_affine(Tape& tape, NodeRef w, const Taylor2& x, NodeRef b);

/// Channel-major view of a layer of Taylor2 values.
struct Taylor2Span {
    std::span<const NodeRef> v0;
    std::span<const NodeRef> v1;
    std::span<const NodeRef> v2;
};

/// Neuron pre-activation: t2_affine summed over inputs,
/// (sum w_k*x_k.v0 + b, sum w_k*x_k.v1, sum w_k*x_k.v2).
/// `weights_first` addresses a contiguous run of x.v0.size() weight nodes.
Taylor2 t2_dot(Tape& tape, NodeRef weights_first, const Taylor2Span& x, NodeRef b);

/// Chain rule through tanh up to second order:
/// y0 = tanh(x0), y1 = (1 - y0^2) x1, y2 = (1 - y0^2) x2 - 2 y0 y1 x1.
Taylor2 t2_tanh(Tape& tape, const Taylor2& x);

}  // namespace pinnlab::ad
