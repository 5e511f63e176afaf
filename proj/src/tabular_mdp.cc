// Copyright 2026 The segdpo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "segdpo/tabular_mdp.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "segdpo/error.h"
#include "segdpo/losses.h"

namespace segdpo {

namespace {

void CheckDistribution(std::span<const double> p, const std::string& what) {
  double s = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) Fail(ErrorKind::kArgument, what + " has a negative entry");
    s += x;
  }
  if (std::abs(s - 1.0) > 1e-12) Fail(ErrorKind::kArgument, what + " does not sum to 1");
}

}  // namespace

void TabularMdp::Validate() const {
  if (num_states < 1 || num_actions < 1 || horizon < 1) {
    Fail(ErrorKind::kArgument, "MDP needs at least one state, action and step");
  }
  if (static_cast<int>(initial.size()) != num_states ||
      static_cast<int>(transition.size()) != num_states * num_actions * num_states) {
    Fail(ErrorKind::kArgument, "MDP tables have inconsistent sizes");
  }
  CheckDistribution(initial, "P(s0)");
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      CheckDistribution(std::span(transition).subspan((s * num_actions + a) * num_states,
                                                      num_states),
                        "P(.|" + std::to_string(s) + "," + std::to_string(a) + ")");
    }
  }
}

void ValidatePolicyTable(const TabularMdp& mdp, std::span<const double> pi) {
  if (static_cast<int>(pi.size()) != mdp.num_states * mdp.num_actions) {
    Fail(ErrorKind::kArgument, "policy table has the wrong size");
  }
  for (int s = 0; s < mdp.num_states; ++s) {
    CheckDistribution(pi.subspan(s * mdp.num_actions, mdp.num_actions),
                      "pi(.|" + std::to_string(s) + ")");
  }
}

Occupancy::Occupancy(int num_states, int num_actions, int horizon)
    : s_(num_states), a_(num_actions), h_(horizon),
      d_(static_cast<size_t>(num_states) * num_actions * horizon, 0.0) {}

std::vector<double> Occupancy::Marginal() const {
  std::vector<double> m(static_cast<size_t>(s_) * a_, 0.0);
  for (int t = 0; t < h_; ++t) {
    for (int s = 0; s < s_; ++s) {
      for (int a = 0; a < a_; ++a) m[s * a_ + a] += at(s, a, t);
    }
  }
  return m;
}

double Occupancy::MassAt(int t) const {
  double m = 0.0;
  for (int s = 0; s < s_; ++s) {
    for (int a = 0; a < a_; ++a) m += at(s, a, t);
  }
  return m;
}

Occupancy OccupancyByEnumeration(const TabularMdp& mdp, std::span<const double> pi,
                                 double gamma) {
  mdp.Validate();
  ValidatePolicyTable(mdp, pi);
  const int S = mdp.num_states, A = mdp.num_actions;
  Occupancy occ(S, A, mdp.horizon);
  // Depth-first over prefixes; prob is the path probability up to and
  // including pi(a_t|s_t).
  std::function<void(int, int, int, double, double)> visit =
      [&](int t, int s, int a, double prob, double discount) {
        occ.at(s, a, t) += discount * prob;
        if (t + 1 >= mdp.horizon) return;
        for (int s2 = 0; s2 < S; ++s2) {
          const double p = mdp.P(s, a, s2);
          if (p == 0.0) continue;
          for (int a2 = 0; a2 < A; ++a2) {
            visit(t + 1, s2, a2, prob * p * pi[s2 * A + a2], discount * gamma);
          }
        }
      };
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) visit(0, s, a, mdp.initial[s] * pi[s * A + a], 1.0);
  }
  return occ;
}

Occupancy OccupancyByRecursion(const TabularMdp& mdp, std::span<const double> pi,
                               double gamma) {
  mdp.Validate();
  ValidatePolicyTable(mdp, pi);
  const int S = mdp.num_states, A = mdp.num_actions;
  Occupancy occ(S, A, mdp.horizon);
  std::vector<double> state(mdp.initial);
  double discount = 1.0;
  for (int t = 0; t < mdp.horizon; ++t) {
    std::vector<double> next(S, 0.0);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const double p = state[s] * pi[s * A + a];
        occ.at(s, a, t) = discount * p;
        for (int s2 = 0; s2 < S; ++s2) next[s2] += p * mdp.P(s, a, s2);
      }
    }
    state = std::move(next);
    discount *= gamma;
  }
  return occ;
}

double BtProbability(const Trajectory& win, const Trajectory& lose,
                     std::span<const double> reward, int num_actions, double gamma,
                     bool corrected) {
  auto total = [&](const Trajectory& tau) {
    if (tau.states.size() != tau.actions.size()) {
      Fail(ErrorKind::kArgument, "trajectory states and actions differ in length");
    }
    double r = 0.0, discount = 1.0;
    for (size_t t = 0; t < tau.states.size(); ++t) {
      const double x = reward[tau.states[t] * num_actions + tau.actions[t]];
      r += corrected ? x : discount * x;
      discount *= gamma;
    }
    return r;
  };
  return Sigmoid(total(win) - total(lose));
}

KlSolution SolveKlRegularized(std::span<const double> d_ref, std::span<const double> reward,
                              double beta) {
  if (d_ref.size() != reward.size()) Fail(ErrorKind::kArgument, "size mismatch");
  if (!(beta > 0.0)) Fail(ErrorKind::kConfig, "beta must be positive");
  // Stationarity of the Lagrangian gives d* = d_ref exp(r / beta) / Z, with Z
  // fixing the total mass.
  double mass = 0.0, mx = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < d_ref.size(); ++i) {
    mass += d_ref[i];
    if (d_ref[i] > 0.0) mx = std::max(mx, reward[i] / beta);
  }
  if (!(mass > 0.0)) Fail(ErrorKind::kDomain, "reference occupancy has no mass");
  double z = 0.0;
  for (size_t i = 0; i < d_ref.size(); ++i) {
    if (d_ref[i] > 0.0) z += d_ref[i] * std::exp(reward[i] / beta - mx);
  }
  KlSolution sol;
  sol.log_partition = mx + std::log(z / mass);
  sol.d_star.resize(d_ref.size());
  for (size_t i = 0; i < d_ref.size(); ++i) {
    sol.d_star[i] =
        d_ref[i] > 0.0 ? d_ref[i] * std::exp(reward[i] / beta - sol.log_partition) : 0.0;
  }
  return sol;
}

std::vector<double> RecoverReward(std::span<const double> d_star,
                                  std::span<const double> d_ref, double beta,
                                  std::vector<bool>* mask) {
  if (d_star.size() != d_ref.size()) Fail(ErrorKind::kArgument, "size mismatch");
  std::vector<double> r(d_ref.size(), 0.0);
  std::vector<bool> m(d_ref.size(), false);
  for (size_t i = 0; i < d_ref.size(); ++i) {
    const bool a = d_star[i] > 0.0, b = d_ref[i] > 0.0;
    if (!a && !b) continue;
    if (a != b) {
      Fail(ErrorKind::kDomain, "occupancy entry " + std::to_string(i) +
                                   " is zero under only one of the policies");
    }
    r[i] = beta * (std::log(d_star[i]) - std::log(d_ref[i]));
    m[i] = true;
  }
  if (mask != nullptr) *mask = std::move(m);
  return r;
}

double ResidualUpToConstant(std::span<const double> a, std::span<const double> b,
                            const std::vector<bool>& mask) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!mask[i]) continue;
    lo = std::min(lo, a[i] - b[i]);
    hi = std::max(hi, a[i] - b[i]);
  }
  if (lo > hi) return 0.0;
  return 0.5 * (hi - lo);
}

double RewardIdentityCheck(const TabularMdp& mdp, std::span<const double> pi_ref,
                           std::span<const double> reward, double beta, double gamma) {
  const std::vector<double> d_ref = OccupancyByEnumeration(mdp, pi_ref, gamma).Marginal();
  const KlSolution sol = SolveKlRegularized(d_ref, reward, beta);
  std::vector<bool> mask;
  const std::vector<double> recovered = RecoverReward(sol.d_star, d_ref, beta, &mask);
  return ResidualUpToConstant(recovered, reward, mask);
}

std::vector<double> ImpliedReward(const TabularMdp& mdp, std::span<const double> pi_star,
                                  std::span<const double> pi_ref, double beta,
                                  double gamma, std::vector<bool>* mask) {
  const auto d_star = OccupancyByEnumeration(mdp, pi_star, gamma).Marginal();
  const auto d_ref = OccupancyByEnumeration(mdp, pi_ref, gamma).Marginal();
  return RecoverReward(d_star, d_ref, beta, mask);
}

}  // namespace segdpo
