#include "rrse/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace rrse {
namespace {

double evaluate(const MultiScalarFn& f, const std::vector<TensorD>& inputs) {
  TapeD tape;
  std::vector<VarD> vars;
  vars.reserve(inputs.size());
  for (const TensorD& t : inputs) vars.push_back(tape.constant(t));
  const VarD out = f(tape, vars);
  if (out.value().size() != 1) throw Error("gradcheck: function must return a scalar");
  const double v = out.value()[0];
  if (!std::isfinite(v)) throw Error("gradcheck: function value is not finite");
  return v;
}

}  // namespace

GradcheckReport gradcheck(const MultiScalarFn& f, std::vector<TensorD> inputs, double h,
                          double tol) {
  GradcheckReport report;
  std::vector<TensorD> analytic;
  {
    TapeD tape;
    std::vector<VarD> vars;
    for (const TensorD& t : inputs) vars.push_back(tape.leaf(t, true));
    const VarD out = f(tape, vars);
    tape.backward(out);
    for (const VarD& v : vars) analytic.push_back(tape.grad(v));
    ++report.evaluations;
  }

  for (std::size_t k = 0; k < inputs.size(); ++k) {
    double diff = 0.0;
    double ref = 1e-8;
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double saved = inputs[k][i];
      inputs[k][i] = saved + h;
      const double plus = evaluate(f, inputs);
      inputs[k][i] = saved - h;
      const double minus = evaluate(f, inputs);
      inputs[k][i] = saved;
      report.evaluations += 2;

      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic[k][i];
      if (!std::isfinite(a) || !std::isfinite(numeric)) {
        throw Error("gradcheck: non-finite gradient");
      }
      diff = std::max(diff, std::abs(a - numeric));
      ref = std::max({ref, std::abs(a), std::abs(numeric)});
    }
    report.max_rel_err = std::max(report.max_rel_err, diff / ref);
  }
  report.pass = report.max_rel_err < tol;
  return report;
}

GradcheckReport gradcheck(const ScalarFn& f, TensorD theta, double h, double tol) {
  std::vector<TensorD> inputs;
  inputs.push_back(std::move(theta));
  return gradcheck([&f](TapeD& tape, std::span<const VarD> v) { return f(tape, v[0]); },
                   std::move(inputs), h, tol);
}

}  // namespace rrse
