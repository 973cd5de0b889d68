#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "irae/error.hpp"

namespace irae {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_enabled();

namespace detail {

template <typename T>
struct Node {
    Shape shape;
    std::vector<T> data;
    std::vector<T> grad;  // empty until a gradient is accumulated
    bool requires_grad = false;
    bool produced = false;  // output of an operation rather than a leaf
    bool consumed = false;  // graph edges released by backward()
    std::uint64_t sequence = 0;
    std::vector<std::shared_ptr<Node>> parents;
    // Reads this node's grad and accumulates into the parents' grads.
    std::function<void(Node&)> backward;

    std::vector<T>& grad_buffer()
    {
        if (grad.empty()) grad.assign(data.size(), T(0));
        return grad;
    }
};

std::uint64_t next_sequence();

}  // namespace detail

/// Dense row-major tensor with tape-style reverse-mode differentiation.
///
/// A Tensor is a cheap handle; copies share the same storage. Results of
/// operations are immutable. Leaves (tensors not produced by an operation)
/// may be mutated in place, which is how optimizers update parameters.
template <typename T>
class Tensor {
public:
    using value_type = T;
    using NodePtr = std::shared_ptr<detail::Node<T>>;

    Tensor() = default;
    Tensor(Shape shape, std::vector<T> data, bool requires_grad = false);

    static Tensor zeros(const Shape& shape, bool requires_grad = false);
    static Tensor full(const Shape& shape, T value, bool requires_grad = false);
    static Tensor scalar(T value, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const;
    std::size_t dim(std::size_t axis) const;
    std::size_t rank() const { return shape().size(); }
    std::size_t numel() const;

    std::span<const T> data() const;
    // Leaf-only mutable access.
    std::span<T> mutable_data();
    T item() const;
    T at(std::initializer_list<std::size_t> index) const;

    bool requires_grad() const;
    void set_requires_grad(bool flag);
    bool has_grad() const;
    std::span<const T> grad() const;
    void zero_grad();

    // Copy of the values with no graph attached.
    Tensor detach() const;
    bool is_leaf() const;

    // Back-propagates from this scalar into every reachable leaf that
    // requires grad. The recorded graph is released afterwards.
    void backward() const;

    // Internal: build an op result. `backward` is recorded only when any
    // parent requires grad and recording is enabled.
    static Tensor from_op(Shape shape, std::vector<T> data, std::vector<Tensor> parents,
                          std::function<void(detail::Node<T>&)> backward);
    detail::Node<T>& node() const;
    const NodePtr& node_ptr() const { return node_; }

private:
    explicit Tensor(NodePtr node) : node_(std::move(node)) {}
    NodePtr node_;
};

template <typename To, typename From>
Tensor<To> convert(const Tensor<From>& src)
{
    std::vector<To> out(src.numel());
    auto in = src.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<To>(in[i]);
    return Tensor<To>(src.shape(), std::move(out));
}

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace irae
