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

#ifndef SEGDPO_TABULAR_MDP_H_
#define SEGDPO_TABULAR_MDP_H_

#include <span>
#include <vector>

namespace segdpo {

// Finite-horizon MDP small enough to enumerate every trajectory prefix.
struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;              // time steps t = 0 .. horizon - 1
  std::vector<double> initial;  // P(s0), size S
  std::vector<double> transition;  // P(s'|s,a), laid out [s][a][s']

  double P(int s, int a, int s2) const {
    return transition[(s * num_actions + a) * num_states + s2];
  }
  // Throws kArgument when a distribution does not sum to one within 1e-12
  // or the sizes are inconsistent.
  void Validate() const;
};

// pi(a|s), laid out [s][a].
using PolicyTable = std::vector<double>;
void ValidatePolicyTable(const TabularMdp& mdp, std::span<const double> pi);

// Discounted state-action occupancy, per time step.
class Occupancy {
 public:
  Occupancy(int num_states, int num_actions, int horizon);

  double at(int s, int a, int t) const { return d_[Index(s, a, t)]; }
  double& at(int s, int a, int t) { return d_[Index(s, a, t)]; }
  // Sum over t.
  std::vector<double> Marginal() const;
  double MassAt(int t) const;

  int num_states() const { return s_; }
  int num_actions() const { return a_; }
  int horizon() const { return h_; }

 private:
  size_t Index(int s, int a, int t) const { return (static_cast<size_t>(t) * s_ + s) * a_ + a; }
  int s_, a_, h_;
  std::vector<double> d_;
};

// d(s_t, a_t) = gamma^t * sum over every prefix (s_0, a_0, ..., s_t, a_t) of
// P(s_0) prod pi(a_k|s_k) P(s_{k+1}|s_k, a_k), by explicit enumeration.
Occupancy OccupancyByEnumeration(const TabularMdp& mdp, std::span<const double> pi,
                                 double gamma);

// Same quantity by forward propagation of the state distribution.
Occupancy OccupancyByRecursion(const TabularMdp& mdp, std::span<const double> pi,
                               double gamma);

struct Trajectory {
  std::vector<int> states;
  std::vector<int> actions;
};

// sigma(R(w) - R(l)) with R(tau) = sum_t gamma^t r(s_t, a_t), or the plain
// sum when corrected is set. reward is laid out [s][a].
double BtProbability(const Trajectory& win, const Trajectory& lose,
                     std::span<const double> reward, int num_actions, double gamma,
                     bool corrected);

// Maximizer of E_d[r] - beta KL(d || d_ref) over nonnegative measures on
// S x A with the same total mass as d_ref.
struct KlSolution {
  std::vector<double> d_star;
  double log_partition = 0.0;
};
KlSolution SolveKlRegularized(std::span<const double> d_ref, std::span<const double> reward,
                              double beta);

// beta log(d_star / d_ref) entrywise. Entries where both are zero are skipped
// (left as 0 and marked false in the mask). Throws kDomain when only one of
// them is zero.
std::vector<double> RecoverReward(std::span<const double> d_star,
                                  std::span<const double> d_ref, double beta,
                                  std::vector<bool>* mask = nullptr);

// min over c of max |a - b - c| across the masked entries.
double ResidualUpToConstant(std::span<const double> a, std::span<const double> b,
                            const std::vector<bool>& mask);

// Solves the KL-regularized objective against pi_ref's occupancy, recovers
// the reward from the optimum and returns the residual against the input
// reward after removing the best additive constant.
double RewardIdentityCheck(const TabularMdp& mdp, std::span<const double> pi_ref,
                           std::span<const double> reward, double beta, double gamma);

// Reward field implied by a pair of tabular policies:
// beta log(d^{pi_star}(s,a) / d^{pi_ref}(s,a)) on the marginal occupancies.
std::vector<double> ImpliedReward(const TabularMdp& mdp, std::span<const double> pi_star,
                                  std::span<const double> pi_ref, double beta,
                                  double gamma, std::vector<bool>* mask = nullptr);

}  // namespace segdpo

#endif  // SEGDPO_TABULAR_MDP_H_
