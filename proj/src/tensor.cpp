#include "irae/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>
#include <unordered_set>

namespace irae {

namespace {
thread_local bool g_grad_enabled = true;
}

std::size_t shape_numel(const Shape& shape)
{
    std::size_t n = 1;
    for (auto extent : shape) n *= extent;
    return n;
}

std::string shape_string(const Shape& shape)
{
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

namespace detail {
std::uint64_t next_sequence()
{
    static std::atomic<std::uint64_t> counter{0};
    return ++counter;
}
}  // namespace detail

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data, bool requires_grad)
{
    for (auto extent : shape) {
        if (extent == 0) throw ShapeError("tensor extents must be positive, got " + shape_string(shape));
    }
    if (shape_numel(shape) != data.size()) {
        throw ShapeError("shape " + shape_string(shape) + " needs " + std::to_string(shape_numel(shape)) +
                         " values, got " + std::to_string(data.size()));
    }
    node_ = std::make_shared<detail::Node<T>>();
    node_->shape = std::move(shape);
    node_->data = std::move(data);
    node_->requires_grad = requires_grad;
    node_->sequence = detail::next_sequence();
}

template <typename T>
Tensor<T> Tensor<T>::zeros(const Shape& shape, bool requires_grad)
{
    return Tensor(shape, std::vector<T>(shape_numel(shape), T(0)), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(const Shape& shape, T value, bool requires_grad)
{
    return Tensor(shape, std::vector<T>(shape_numel(shape), value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad)
{
    return Tensor(Shape{1}, std::vector<T>{value}, requires_grad);
}

template <typename T>
detail::Node<T>& Tensor<T>::node() const
{
    if (!node_) throw Error("use of an undefined tensor");
    return *node_;
}

template <typename T>
const Shape& Tensor<T>::shape() const
{
    return node().shape;
}

template <typename T>
std::size_t Tensor<T>::dim(std::size_t axis) const
{
    const auto& s = shape();
    if (axis >= s.size()) throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_string(s));
    return s[axis];
}

template <typename T>
std::size_t Tensor<T>::numel() const
{
    return node().data.size();
}

template <typename T>
std::span<const T> Tensor<T>::data() const
{
    return node().data;
}

template <typename T>
std::span<T> Tensor<T>::mutable_data()
{
    auto& n = node();
    if (n.produced) throw Error("only leaf tensors may be modified in place");
    return n.data;
}

template <typename T>
T Tensor<T>::item() const
{
    if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_string(shape()));
    return node().data[0];
}

template <typename T>
T Tensor<T>::at(std::initializer_list<std::size_t> index) const
{
    const auto& s = shape();
    if (index.size() != s.size()) throw ShapeError("index rank mismatch for " + shape_string(s));
    std::size_t flat = 0;
    std::size_t axis = 0;
    for (auto i : index) {
        if (i >= s[axis]) throw ShapeError("index out of range for " + shape_string(s));
        flat = flat * s[axis] + i;
        ++axis;
    }
    return node().data[flat];
}

template <typename T>
bool Tensor<T>::requires_grad() const
{
    return node().requires_grad;
}

template <typename T>
void Tensor<T>::set_requires_grad(bool flag)
{
    auto& n = node();
    if (n.produced) throw Error("requires_grad can only be set on leaf tensors");
    n.requires_grad = flag;
}

template <typename T>
bool Tensor<T>::has_grad() const
{
    return !node().grad.empty();
}

template <typename T>
std::span<const T> Tensor<T>::grad() const
{
    auto& n = node();
    if (n.grad.empty()) throw Error("tensor has no gradient");
    return n.grad;
}

template <typename T>
void Tensor<T>::zero_grad()
{
    node().grad.clear();
}

template <typename T>
Tensor<T> Tensor<T>::detach() const
{
    return Tensor(shape(), node().data, false);
}

template <typename T>
bool Tensor<T>::is_leaf() const
{
    return !node().produced;
}

template <typename T>
Tensor<T> Tensor<T>::from_op(Shape shape, std::vector<T> data, std::vector<Tensor> parents,
                             std::function<void(detail::Node<T>&)> backward)
{
    Tensor out(std::move(shape), std::move(data), false);
    out.node_->produced = true;
    if (!g_grad_enabled) return out;
    bool any = false;
    for (const auto& p : parents) any = any || p.requires_grad();
    if (!any) return out;
    for (const auto& p : parents) {
        if (p.node().consumed) throw Error("operand belongs to a graph already consumed by backward()");
    }
    out.node_->requires_grad = true;
    out.node_->parents.reserve(parents.size());
    for (auto& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backward = std::move(backward);
    return out;
}

template <typename T>
void Tensor<T>::backward() const
{
    auto& root = node();
    if (root.data.size() != 1) throw ShapeError("backward() needs a scalar loss, got " + shape_string(root.shape));
    if (root.consumed) throw Error("backward() called twice on the same graph");
    if (!root.requires_grad) throw Error("loss is not connected to any tensor that requires grad");

    // Shared handles keep every node alive while edges are released below.
    std::vector<NodePtr> order;
    std::unordered_set<detail::Node<T>*> seen;
    std::vector<NodePtr> stack{node_};
    seen.insert(&root);
    while (!stack.empty()) {
        auto n = std::move(stack.back());
        stack.pop_back();
        if (n->consumed) throw Error("backward() reached a graph that was already consumed");
        for (auto& p : n->parents) {
            if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p);
        }
        order.push_back(std::move(n));
    }
    // Operands always carry a smaller sequence number than their results.
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a->sequence > b->sequence; });

    auto& seed = root.grad_buffer();
    seed[0] += T(1);
    for (auto& n : order) {
        if (n->backward && !n->grad.empty()) n->backward(*n);
    }
    for (auto& n : order) {
        if (!n->produced) continue;
        n->backward = nullptr;
        n->parents.clear();
        n->consumed = true;
    }
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace irae
