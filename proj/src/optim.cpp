// Copyright 2026 The MSSR Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mssr/optim.hpp"

#include <cmath>
#include <string>

namespace mssr {

void LrSchedule::validate() const {
  if (!(initial > 0.0) || !(decay_factor > 0.0) || decay_factor > 1.0 ||
      decay_start < 0 || decay_interval <= 0) {
    throw std::invalid_argument(
        "learning-rate schedule needs initial > 0, 0 < decay_factor <= 1, "
        "decay_start >= 0 and decay_interval > 0");
  }
}

double lr_at(std::int64_t update, const LrSchedule& s) {
  if (update < 0) throw std::invalid_argument("lr_at: negative update");
  if (update < s.decay_start) return s.initial;
  const std::int64_t steps = (update - s.decay_start) / s.decay_interval + 1;
  return s.initial * std::pow(s.decay_factor, static_cast<double>(steps));
}

template <typename T>
void adam_update(std::span<T> theta, std::span<const T> grad, std::span<T> m,
                 std::span<T> v, std::int64_t t, double lr,
                 const AdamHyper& h) {
  if (grad.size() != theta.size() || m.size() != theta.size() ||
      v.size() != theta.size()) {
    throw std::invalid_argument("adam_update: size mismatch");
  }
  if (t < 1) throw std::invalid_argument("adam_update: step must be >= 1");
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    const double mi = h.beta1 * m[i] + (1.0 - h.beta1) * g;
    const double vi = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double step = lr * (mi / c1) / (std::sqrt(vi / c2) + h.epsilon);
    theta[i] = static_cast<T>(theta[i] - step);
  }
}

template void adam_update<float>(std::span<float>, std::span<const float>,
                                 std::span<float>, std::span<float>,
                                 std::int64_t, double, const AdamHyper&);
template void adam_update<double>(std::span<double>, std::span<const double>,
                                  std::span<double>, std::span<double>,
                                  std::int64_t, double, const AdamHyper&);

AdamState AdamState::for_graph(const Graph& graph) {
  AdamState s;
  for (const auto& p : graph.params()) {
    for (const Tensor* t : {&p.conv.weight, &p.conv.bias}) {
      s.m.emplace_back(t->size(), 0.0f);
      s.v.emplace_back(t->size(), 0.0f);
    }
  }
  return s;
}

bool AdamState::matches(const Graph& graph) const {
  if (m.size() != 2 * graph.params().size() || v.size() != m.size()) {
    return false;
  }
  std::size_t k = 0;
  for (const auto& p : graph.params()) {
    for (const Tensor* t : {&p.conv.weight, &p.conv.bias}) {
      if (m[k].size() != t->size() || v[k].size() != t->size()) return false;
      ++k;
    }
  }
  return true;
}

void adam_step(AdamState& state, Graph& graph, double lr) {
  if (!state.matches(graph)) {
    throw std::invalid_argument("adam_step: optimizer state does not match graph");
  }
  for (const auto& p : graph.params()) {
    for (const auto& [t, part] : {std::pair{&p.conv.weight, "weight"},
                                  std::pair{&p.conv.bias, "bias"}}) {
      if (!t->has_grad()) {
        throw TrainingError("parameter '" + p.name + "." + part +
                            "' has no gradient");
      }
      for (float g : t->grad()) {
        if (!std::isfinite(g)) {
          throw TrainingError("non-finite gradient in parameter '" + p.name +
                              "." + part + "'");
        }
      }
    }
  }
  ++state.t;
  std::size_t k = 0;
  for (auto& p : graph.params()) {
    for (Tensor* t : {&p.conv.weight, &p.conv.bias}) {
      adam_update<float>(t->data(), t->grad(), state.m[k], state.v[k], state.t,
                         lr, state.hyper);
      ++k;
    }
  }
}

}  // namespace mssr
