#include "pinnlab/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pinnlab/errors.hpp"

namespace pinnlab::ad {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

double logistic(double x) {
    // Split by sign so exp() never overflows.
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

bool Gradient::contains(NodeRef node) const noexcept {
    return std::binary_search(leaf_nodes_.begin(), leaf_nodes_.end(), node.index);
}

double Gradient::operator[](NodeRef leaf) const {
    const auto it = std::lower_bound(leaf_nodes_.begin(), leaf_nodes_.end(), leaf.index);
    if (it == leaf_nodes_.end() || *it != leaf.index) {
        throw ConfigError("gradient requested for node " + std::to_string(leaf.index) +
                          ", which is not a trainable leaf");
    }
    return values_[static_cast<std::size_t>(it - leaf_nodes_.begin())];
}

void Tape::clear() noexcept {
    values_.clear();
    records_.clear();
    operands_.clear();
    leaf_nodes_.clear();
}

void Tape::reserve(std::size_t nodes, std::size_t operands) {
    values_.reserve(nodes);
    records_.reserve(nodes);
    operands_.reserve(operands);
}

NodeRef Tape::push(Op op, std::uint32_t a, std::uint32_t b, std::uint32_t c, double value) {
    const auto index = static_cast<std::uint32_t>(values_.size());
    if (!std::isfinite(value)) {
        throw NumericError("non-finite value produced", index);
    }
    values_.push_back(value);
    records_.push_back(Record{op, a, b, c});
    return NodeRef{index};
}

void Tape::check_operand(NodeRef n) const {
    if (n.index >= values_.size()) {
        throw ConfigError("operand " + std::to_string(n.index) + " is not on this tape (size " +
                          std::to_string(values_.size()) + ")");
    }
}

NodeRef Tape::leaf(double value) {
    if (!std::isfinite(value)) {
        throw NumericError("leaf value must be finite", values_.size());
    }
    const NodeRef n = push(Op::leaf, kNone, kNone, kNone, value);
    leaf_nodes_.push_back(n.index);
    return n;
}

NodeRef Tape::constant(double value) {
    if (!std::isfinite(value)) {
        throw NumericError("constant value must be finite", values_.size());
    }
    return push(Op::constant, kNone, kNone, kNone, value);
}

NodeRef Tape::add(NodeRef a, NodeRef b) {
    check_operand(a);
    check_operand(b);
    return push(Op::add, a.index, b.index, kNone, values_[a.index] + values_[b.index]);
}

NodeRef Tape::sub(NodeRef a, NodeRef b) {
    check_operand(a);
    check_operand(b);
    return push(Op::sub, a.index, b.index, kNone, values_[a.index] - values_[b.index]);
}

NodeRef Tape::mul(NodeRef a, NodeRef b) {
    check_operand(a);
    check_operand(b);
    return push(Op::mul, a.index, b.index, kNone, values_[a.index] * values_[b.index]);
}

NodeRef Tape::div(NodeRef a, NodeRef b) {
    check_operand(a);
    check_operand(b);
    const double denominator = values_[b.index];
    if (denominator == 0.0) {
        throw NumericError("division by zero-valued node", b.index);
    }
    return push(Op::div, a.index, b.index, kNone, values_[a.index] / denominator);
}

NodeRef Tape::neg(NodeRef a) {
    check_operand(a);
    return push(Op::neg, a.index, kNone, kNone, -values_[a.index]);
}

NodeRef Tape::square(NodeRef a) {
    check_operand(a);
    const double x = values_[a.index];
    return push(Op::square, a.index, kNone, kNone, x * x);
}

NodeRef Tape::tanh(NodeRef a) {
    check_operand(a);
    return push(Op::tanh, a.index, kNone, kNone, std::tanh(values_[a.index]));
}

NodeRef Tape::sigmoid(NodeRef a) {
    check_operand(a);
    return push(Op::sigmoid, a.index, kNone, kNone, logistic(values_[a.index]));
}

NodeRef Tape::exp(NodeRef a) {
    check_operand(a);
    return push(Op::exp, a.index, kNone, kNone, std::exp(values_[a.index]));
}

NodeRef Tape::dot(std::span<const NodeRef> lhs, std::span<const NodeRef> rhs) {
    if (lhs.size() != rhs.size()) {
        throw ConfigError("dot operands differ in length");
    }
    const auto offset = static_cast<std::uint32_t>(operands_.size());
    const auto count = static_cast<std::uint32_t>(lhs.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < lhs.size(); ++k) {
        check_operand(lhs[k]);
        check_operand(rhs[k]);
        acc += values_[lhs[k].index] * values_[rhs[k].index];
    }
    for (const NodeRef n : lhs) operands_.push_back(n.index);
    for (const NodeRef n : rhs) operands_.push_back(n.index);
    return push(Op::dot, offset, count, kNone, acc);
}

NodeRef Tape::dot(NodeRef lhs_first, std::span<const NodeRef> rhs) {
    const auto count = static_cast<std::uint32_t>(rhs.size());
    if (count > 0) {
        check_operand(NodeRef{lhs_first.index + count - 1});
    }
    const auto limit = static_cast<std::uint32_t>(values_.size());
    std::uint32_t max_index = 0;
    for (const NodeRef n : rhs) max_index = std::max(max_index, n.index);
    if (count > 0 && max_index >= limit) {
        throw ConfigError("dot operand " + std::to_string(max_index) + " is not on this tape");
    }
    const auto offset = static_cast<std::uint32_t>(operands_.size());
    operands_.resize(operands_.size() + count);
    std::uint32_t* dst = operands_.data() + offset;
    const double* val = values_.data();
    const double* w = val + lhs_first.index;
    double acc = 0.0;
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint32_t idx = rhs[k].index;
        dst[k] = idx;
        acc += w[k] * val[idx];
    }
    return push(Op::dot_run, offset, count, lhs_first.index, acc);
}

std::vector<NodeRef> Tape::operands(NodeRef n) const {
    const Record& r = records_.at(n.index);
    std::vector<NodeRef> out;
    switch (r.op) {
        case Op::leaf:
        case Op::constant: break;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div: out = {NodeRef{r.a}, NodeRef{r.b}}; break;
        case Op::neg:
        case Op::square:
        case Op::tanh:
        case Op::sigmoid:
        case Op::exp: out = {NodeRef{r.a}}; break;
        case Op::dot:
            for (std::uint32_t k = 0; k < 2 * r.b; ++k) out.push_back(NodeRef{operands_[r.a + k]});
            break;
        case Op::dot_run:
            for (std::uint32_t k = 0; k < r.b; ++k) out.push_back(NodeRef{r.c + k});
            for (std::uint32_t k = 0; k < r.b; ++k) out.push_back(NodeRef{operands_[r.a + k]});
            break;
        case Op::sum:
            for (std::uint32_t k = 0; k < r.b; ++k) out.push_back(NodeRef{operands_[r.a + k]});
            break;
    }
    return out;
}

NodeRef Tape::sum(std::span<const NodeRef> terms) {
    const auto offset = static_cast<std::uint32_t>(operands_.size());
    double acc = 0.0;
    for (const NodeRef n : terms) {
        check_operand(n);
        acc += values_[n.index];
    }
    for (const NodeRef n : terms) operands_.push_back(n.index);
    return push(Op::sum, offset, static_cast<std::uint32_t>(terms.size()), kNone, acc);
}

Gradient Tape::backward(NodeRef root) {
    check_operand(root);
    adjoint_.assign(root.index + 1, 0.0);
    adjoint_[root.index] = 1.0;

    double* adj = adjoint_.data();
    const double* val = values_.data();
    const std::uint32_t* args = operands_.data();

    for (std::uint32_t i = root.index + 1; i-- > 0;) {
        const double g = adj[i];
        if (g == 0.0) {
            continue;
        }
        if (!std::isfinite(g)) {
            throw NumericError("non-finite adjoint", i);
        }
        const Record& r = records_[i];
        switch (r.op) {
            case Op::leaf:
            case Op::constant:
                break;
            case Op::add:
                adj[r.a] += g;
                adj[r.b] += g;
                break;
            case Op::sub:
                adj[r.a] += g;
                adj[r.b] -= g;
                break;
            case Op::mul:
                adj[r.a] += g * val[r.b];
                adj[r.b] += g * val[r.a];
                break;
            case Op::div: {
                const double inv = 1.0 / val[r.b];
                adj[r.a] += g * inv;
                adj[r.b] -= g * val[i] * inv;
                break;
            }
            case Op::neg:
                adj[r.a] -= g;
                break;
            case Op::square:
                adj[r.a] += 2.0 * g * val[r.a];
                break;
            case Op::tanh:
                adj[r.a] += g * (1.0 - val[i] * val[i]);
                break;
            case Op::sigmoid:
                adj[r.a] += g * val[i] * (1.0 - val[i]);
                break;
            case Op::exp:
                adj[r.a] += g * val[i];
                break;
            case Op::dot: {
                const std::uint32_t* lhs = args + r.a;
                const std::uint32_t* rhs = lhs + r.b;
                for (std::uint32_t k = 0; k < r.b; ++k) {
                    adj[lhs[k]] += g * val[rhs[k]];
                    adj[rhs[k]] += g * val[lhs[k]];
                }
                break;
            }
            case Op::dot_run: {
                const std::uint32_t* rhs = args + r.a;
                double* adj_w = adj + r.c;
                const double* w = val + r.c;
                const std::uint32_t count = r.b;
                // Weights precede their consumers, inputs are distinct nodes;
                // the two loops touch disjoint adjoints.
                for (std::uint32_t k = 0; k < count; ++k) {
                    adj_w[k] += g * val[rhs[k]];
                }
                for (std::uint32_t k = 0; k < count; ++k) {
                    adj[rhs[k]] += g * w[k];
                }
                break;
            }
            case Op::sum: {
                const std::uint32_t* terms = args + r.a;
                for (std::uint32_t k = 0; k < r.b; ++k) {
                    adj[terms[k]] += g;
                }
                break;
            }
        }
    }

    Gradient grad;
    grad.leaf_nodes_ = leaf_nodes_;
    grad.values_.resize(leaf_nodes_.size());
    for (std::size_t k = 0; k < leaf_nodes_.size(); ++k) {
        const std::uint32_t n = leaf_nodes_[k];
        grad.values_[k] = n <= root.index ? adj[n] : 0.0;
    }
    return grad;
}

Taylor2 t2_input(Tape& tape, double t) {
    return Taylor2{tape.constant(t), tape.constant(1.0), tape.constant(0.0)};
}

Taylor2 t2_affine(Tape& tape, NodeRef w, const Taylor2& x, NodeRef b) {
    return Taylor2{tape.add(tape.mul(w, x.v0), b), tape.mul(w, x.v1), tape.mul(w, x.v2)};
}

Taylor2 t2_dot(Tape& tape, NodeRef weights_first, const Taylor2Span& x, NodeRef b) {
    const NodeRef z0 = tape.dot(weights_first, x.v0);
    const NodeRef z1 = tape.dot(weights_first, x.v1);
    const NodeRef z2 = tape.dot(weights_first, x.v2);
    return Taylor2{tape.add(z0, b), z1, z2};
}

Taylor2 t2_tanh(Tape& tape, const Taylor2& x) {
    const NodeRef y0 = tape.tanh(x.v0);
    const NodeRef slope = tape.sub(tape.constant(1.0), tape.square(y0));
    const NodeRef y1 = tape.mul(slope, x.v1);
    const NodeRef curvature = tape.mul(tape.mul(tape.constant(2.0), tape.mul(y0, y1)), x.v1);
    const NodeRef y2 = tape.sub(tape.mul(slope, x.v2), curvature);
    return Taylor2{y0, y1, y2};
}

}  // namespace pinnlab::ad
