#pragma once

#include <functional>
#include <vector>

#include "irae/tensor.hpp"

namespace irae {

/// Central-difference gradient of a scalar function:
/// (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate i.
/// Only evaluates `f`; never touches the autodiff graph.
template <typename T>
Tensor<T> finite_diff_grad(const std::function<Tensor<T>(const Tensor<T>&)>& f, const Tensor<T>& x, double h);

struct GradCheckResult {
    double max_relative_error = 0.0;  // max |ad - fd| / (|fd| + 1e-8)
    double max_abs_error = 0.0;
    std::size_t checked = 0;
};

/// Compares reverse-mode gradients of `loss` with central differences
/// with respect to every element of every leaf in `wrt`.
///
/// `loss` must rebuild its graph from the current leaf values on each call.
/// Leaves are perturbed in place and restored afterwards.
GradCheckResult check_gradients(const std::function<Tensor<double>()>& loss, std::vector<Tensor<double>> wrt,
                                double h = 1e-5);

}  // namespace irae
