#include "acnn/adam.hpp"

#include <cmath>

#include "acnn/errors.hpp"

namespace acnn {

void AdamState::init(const std::vector<ParamTensor*>& params) {
  step = 0;
  m.clear();
  v.clear();
  for (const ParamTensor* p : params) {
    m.emplace_back(p->value.rows, p->value.cols);
    v.emplace_back(p->value.rows, p->value.cols);
  }
}

void adam_step(const std::vector<ParamTensor*>& params, AdamState& state) {
  if (params.size() != state.m.size())
    throw ShapeMismatch("adam state initialized for " + std::to_string(state.m.size()) +
                        " tensors, got " + std::to_string(params.size()));
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < params.size(); ++i) {
    ParamTensor& p = *params[i];
    if (!p.value.same_shape(state.m[i]))
      throw ShapeMismatch("adam tensor " + p.name + " shape changed");
    double* mv = state.m[i].v.data();
    double* vv = state.v[i].v.data();
    const double* g = p.grad.v.data();
    double* theta = p.value.v.data();
    const size_t n = p.value.v.size();
    for (size_t j = 0; j < n; ++j) {
      mv[j] = state.beta1 * mv[j] + (1.0 - state.beta1) * g[j];
      vv[j] = state.beta2 * vv[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double m_hat = mv[j] / bc1;
      const double v_hat = vv[j] / bc2;
      theta[j] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

}  // namespace acnn
