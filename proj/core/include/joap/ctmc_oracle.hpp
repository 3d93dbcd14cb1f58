#pragma once

// Two-phase replacement of the deterministic sub-process holding time.
// Each busy sub-process is in phase 1 or 2; the branching weights r1 = -1
// and r2 = 5/4 make some off-diagonal entries negative, so the matrix is a
// moment-matching device rather than a probabilistic generator. Only its
// left null vector and the resulting occupancy marginals are meaningful.

#include <Eigen/Dense>
#include <vector>

namespace joap {

struct ChainState {
  int s1 = 0;  // sub-processes in phase 1
  int s2 = 0;  // busy sub-processes in total
};

struct TwoPhaseChain {
  int n = 0;
  double kappa = 0.0;   // 2 / T_v
  double r1 = -1.0;
  double r2 = 1.25;
  double lambda = 0.0;
  std::vector<ChainState> states;  // ordered by s2, then s1
  Eigen::MatrixXd generator;

  /// Position of (s1, s2) in `states`; requires 0 <= s1 <= s2 <= n.
  static int index_of(int s1, int s2) { return s2 * (s2 + 1) / 2 + s1; }
};

TwoPhaseChain build_generator(int n, double lambda, double t_v);

/// Solves x T = 0 with sum(x) = 1. Throws SingularityError when the null
/// space is not one-dimensional.
Eigen::VectorXd steady_state(const TwoPhaseChain& chain);

/// Distribution of s2 (total busy sub-processes), length n + 1.
std::vector<double> occupancy_marginal(const TwoPhaseChain& chain,
                                       const Eigen::VectorXd& x);

/// Mass of the states with s2 == n.
double blocking_probability(const TwoPhaseChain& chain,
                            const Eigen::VectorXd& x);
double blocking_probability(const TwoPhaseChain& chain);

}  // namespace joap
