#pragma once

#include <vector>

#include "acnn/matrix.hpp"
#include "acnn/nn.hpp"

namespace acnn {

// Bias-corrected Adam. Moments are kept per tensor, parallel to the
// parameter list the state was initialized with.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  long long step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;

  void init(const std::vector<ParamTensor*>& params);
};

// theta -= lr * m_hat / (sqrt(v_hat) + eps). ShapeMismatch when params do not
// match the initialized state.
void adam_step(const std::vector<ParamTensor*>& params, AdamState& state);

}  // namespace acnn
