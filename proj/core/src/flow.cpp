#include "rsmfg/flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rsmfg {

MeanField MeasureFlow::state_marginal(std::size_t t,
                                      std::size_t num_states) const {
  MeanField d;
  d.dist.assign(num_states, 0.0);
  for (const FlowAtom& atom : stages.at(t)) d.dist[atom.state] += atom.mass;
  return d;
}

double MeasureFlow::stage_mass(std::size_t t) const {
  double sum = 0.0;
  for (const FlowAtom& atom : stages.at(t)) sum += atom.mass;
  return sum;
}

void MeasureFlow::sort_stage(std::size_t t) {
  std::sort(stages.at(t).begin(), stages.at(t).end(),
            [](const FlowAtom& x, const FlowAtom& y) {
              if (x.state != y.state) return x.state < y.state;
              return x.level < y.level;
            });
}

MeasureFlow constant_initial_flow(const GameSpec& spec) {
  MeasureFlow flow;
  flow.stages.resize(spec.horizon_T + 2);
  for (auto& stage : flow.stages) {
    for (std::size_t s = 0; s < spec.num_states(); ++s) {
      if (spec.kappa0[s] > 0.0) stage.push_back({s, 0.0, spec.kappa0[s]});
    }
  }
  return flow;
}

MeasureFlow blend_flows(const MeasureFlow& a, const MeasureFlow& b,
                        double weight_b, double mass_floor) {
  if (a.num_stages() != b.num_stages()) {
    throw std::invalid_argument("blend_flows: stage counts differ");
  }
  const double wa = 1.0 - weight_b;
  MeasureFlow out;
  out.stages.resize(a.num_stages());
  out.stages[0] = a.stages[0];
  for (std::size_t t = 1; t < a.num_stages(); ++t) {
    const auto& sa = a.stages[t];
    const auto& sb = b.stages[t];
    std::vector<FlowAtom>& dst = out.stages[t];
    std::size_t i = 0, j = 0;
    while (i < sa.size() || j < sb.size()) {
      const bool take_a =
          j == sb.size() ||
          (i < sa.size() &&
           (sa[i].state < sb[j].state ||
            (sa[i].state == sb[j].state &&
             sa[i].level < sb[j].level - MeasureFlow::kLevelMatchTol)));
      const bool take_b =
          i == sa.size() ||
          (j < sb.size() &&
           (sb[j].state < sa[i].state ||
            (sb[j].state == sa[i].state &&
             sb[j].level < sa[i].level - MeasureFlow::kLevelMatchTol)));
      if (take_a) {
        dst.push_back({sa[i].state, sa[i].level, wa * sa[i].mass});
        ++i;
      } else if (take_b) {
        dst.push_back({sb[j].state, sb[j].level, weight_b * sb[j].mass});
        ++j;
      } else {
        // Matched atom: same state, levels within tolerance. Keep a's level.
        dst.push_back(
            {sa[i].state, sa[i].level, wa * sa[i].mass + weight_b * sb[j].mass});
        ++i;
        ++j;
      }
    }
    if (mass_floor > 0.0) {
      double kept = 0.0;
      std::vector<FlowAtom> pruned;
      pruned.reserve(dst.size());
      for (const FlowAtom& atom : dst) {
        if (atom.mass >= mass_floor) {
          pruned.push_back(atom);
          kept += atom.mass;
        }
      }
      if (pruned.size() != dst.size() && !pruned.empty() && kept > 0.0) {
        for (FlowAtom& atom : pruned) atom.mass /= kept;
        dst = std::move(pruned);
      }
    }
  }
  return out;
}

}  // namespace rsmfg
