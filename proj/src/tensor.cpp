#include "ffmct/tensor.hpp"

#include <cmath>
#include <unordered_set>

namespace ffmct {

std::int64_t shape_numel(const Shape& shape) {
    std::int64_t n = 1;
    for (std::int64_t d : shape) {
        FFMCT_CHECK_ARG(d > 0, "tensor extents must be positive, got ", d);
        n *= d;
    }
    return n;
}

std::string shape_str(const Shape& shape) {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

void check_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        FFMCT_CHECK_ARG(std::isfinite(v), what, ": non-finite value rejected");
    }
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    auto node = std::make_shared<detail::Node>();
    node->data.assign(static_cast<size_t>(shape_numel(shape)), 0.0);
    node->shape = std::move(shape);
    node->requires_grad = requires_grad;
    return wrap(std::move(node));
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    FFMCT_CHECK_ARG(std::isfinite(value), "Tensor::full: non-finite value rejected");
    auto node = std::make_shared<detail::Node>();
    node->data.assign(static_cast<size_t>(shape_numel(shape)), value);
    node->shape = std::move(shape);
    node->requires_grad = requires_grad;
    return wrap(std::move(node));
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data, bool requires_grad) {
    std::int64_t n = shape_numel(shape);
    FFMCT_CHECK_ARG(n == static_cast<std::int64_t>(data.size()), "Tensor::from_data: shape ",
                    shape_str(shape), " wants ", n, " values, got ", data.size());
    check_finite(data, "Tensor::from_data");
    auto node = std::make_shared<detail::Node>();
    node->shape = std::move(shape);
    node->data = std::move(data);
    node->requires_grad = requires_grad;
    return wrap(std::move(node));
}

const Shape& Tensor::shape() const {
    FFMCT_CHECK_ARG(node_, "undefined tensor");
    return node_->shape;
}

std::int64_t Tensor::numel() const {
    FFMCT_CHECK_ARG(node_, "undefined tensor");
    return node_->numel();
}

bool Tensor::requires_grad() const {
    FFMCT_CHECK_ARG(node_, "undefined tensor");
    return node_->requires_grad;
}

std::span<const double> Tensor::data() const {
    FFMCT_CHECK_ARG(node_, "undefined tensor");
    return node_->data;
}

std::span<double> Tensor::mutable_data() {
    FFMCT_CHECK_ARG(node_, "undefined tensor");
    return node_->data;
}

bool Tensor::has_grad() const {
    FFMCT_CHECK_ARG(node_, "undefined tensor");
    return !node_->grad.empty();
}

std::span<const double> Tensor::grad() const {
    FFMCT_CHECK_ARG(node_, "undefined tensor");
    FFMCT_CHECK_RUNTIME(!node_->grad.empty(), "tensor has no gradient; run backward first");
    return node_->grad;
}

void Tensor::zero_grad() {
    FFMCT_CHECK_ARG(node_, "undefined tensor");
    node_->grad.clear();
}

double Tensor::item() const {
    FFMCT_CHECK_ARG(node_ && node_->numel() == 1, "item() requires a scalar tensor");
    return node_->data[0];
}

void backward(const Tensor& loss) {
    FFMCT_CHECK_ARG(loss.defined(), "backward: undefined tensor");
    FFMCT_CHECK_ARG(loss.numel() == 1, "backward requires a scalar loss, got shape ",
                    shape_str(loss.shape()));

    // Iterative DFS post-order over parents; reverse gives consumer-first
    // order, so each node's grad is final when its backward_fn runs.
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> visited;
    struct Frame {
        detail::Node* node;
        size_t next_parent;
    };
    std::vector<Frame> stack;
    detail::Node* root = loss.node().get();
    if (visited.insert(root).second) stack.push_back({root, 0});
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            detail::Node* p = f.node->parents[f.next_parent++].get();
            if (visited.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }

    root->grad.assign(1, 1.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* node = *it;
        if (node->backward_fn && node->requires_grad && !node->grad.empty()) {
            node->backward_fn(*node);
        }
    }
}

}  // namespace ffmct
