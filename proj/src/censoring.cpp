#include "prescriptor/censoring.hpp"

#include <algorithm>

namespace prescriptor {

WeightVector km_transform(const CensoredWeightInput& input) {
  const WeightVector& base = input.base;
  if (static_cast<std::size_t>(input.u.size()) != base.n_train || input.delta.size() != base.n_train) {
    throw std::invalid_argument("censored data length does not match weight vector");
  }
  std::vector<WeightEntry> active;
  active.reserve(base.entries.size());
  for (const auto& e : base.entries) {
    if (e.weight < 0.0) throw std::invalid_argument("Kaplan-Meier transform requires nonnegative weights");
    if (e.weight > 0.0) active.push_back(e);
  }
  const auto& u = input.u;
  const auto& delta = input.delta;
  std::sort(active.begin(), active.end(), [&](const WeightEntry& a, const WeightEntry& b) {
    const double ua = u(static_cast<Eigen::Index>(a.index));
    const double ub = u(static_cast<Eigen::Index>(b.index));
    if (ua != ub) return ua < ub;
    if (delta[a.index] != delta[b.index]) return delta[a.index] > delta[b.index];
    return a.index < b.index;
  });

  // tail[i] = sum of weights from position i to the end.
  std::vector<double> tail(active.size() + 1, 0.0);
  for (std::size_t i = active.size(); i-- > 0;) tail[i] = tail[i + 1] + active[i].weight;

  WeightVector out;
  out.n_train = base.n_train;
  double survival = 1.0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (delta[active[i].index]) {
      out.entries.push_back({active[i].index, survival * active[i].weight / tail[i]});
      survival *= tail[i + 1] / tail[i];
    }
  }
  out.entries.erase(std::remove_if(out.entries.begin(), out.entries.end(),
                                   [](const WeightEntry& e) { return e.weight == 0.0; }),
                    out.entries.end());
  out.canonicalize();
  return out;
}

}  // namespace prescriptor
