#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ffmct/common.hpp"

namespace ffmct {

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // allocated lazily during backward / accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Consumes this->grad (final at call time) and accumulates into parents.
    std::function<void(Node&)> backward_fn;

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    void ensure_grad() {
        if (grad.empty()) grad.assign(data.size(), 0.0);
    }
};

}  // namespace detail

// Dense double-precision tensor with tape-based reverse-mode autodiff.
// Value-semantic handle to a shared graph node; data is immutable once the
// tensor participates in a graph, except for in-place parameter updates done
// by the optimizer between steps.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    // Finiteness is enforced here: this is the boundary where external data
    // enters the engine.
    static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const;
    std::int64_t numel() const;
    bool requires_grad() const;

    std::span<const double> data() const;
    // In-place access for optimizer updates and parameter initialization.
    std::span<double> mutable_data();

    bool has_grad() const;
    std::span<const double> grad() const;
    void zero_grad();

    // Scalar extraction; errors unless numel() == 1.
    double item() const;

    std::shared_ptr<detail::Node> node() const { return node_; }
    static Tensor wrap(std::shared_ptr<detail::Node> node) {
        Tensor t;
        t.node_ = std::move(node);
        return t;
    }

private:
    std::shared_ptr<detail::Node> node_;
};

// Reverse topological traversal from a scalar loss; fills `grad` of every
// requires_grad node reachable through the tape.
void backward(const Tensor& loss);

void check_finite(std::span<const double> values, const char* what);

}  // namespace ffmct
