#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rrse/autodiff.hpp"

namespace rrse {

struct GradcheckReport {
  double max_rel_err = 0.0;
  bool pass = false;
  std::size_t evaluations = 0;
};

/// Scalar function of several leaf tensors, evaluated on a fresh 64-bit tape.
using MultiScalarFn = std::function<VarD(TapeD&, std::span<const VarD>)>;
using ScalarFn = std::function<VarD(TapeD&, VarD)>;

/// Compares reverse-mode gradients against central differences
/// (f(t + h e_i) - f(t - h e_i)) / 2h for every element of every input.
/// Per input the error is max|a - n| / max(max|a|, max|n|, 1e-8); the report
/// holds the worst input. Throws on non-finite values.
GradcheckReport gradcheck(const MultiScalarFn& f, std::vector<TensorD> inputs, double h = 1e-4,
                          double tol = 1e-4);

GradcheckReport gradcheck(const ScalarFn& f, TensorD theta, double h = 1e-4, double tol = 1e-4);

}  // namespace rrse
