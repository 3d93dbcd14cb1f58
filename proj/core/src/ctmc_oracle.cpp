#include "joap/ctmc_oracle.hpp"

#include "joap/errors.hpp"

namespace joap {

TwoPhaseChain build_generator(int n, double lambda, double t_v) {
  if (n < 1) throw DomainError("build_generator: n must be >= 1");
  if (!(lambda > 0.0)) throw DomainError("build_generator: lambda must be > 0");
  if (!(t_v > 0.0)) throw DomainError("build_generator: T_v must be > 0");

  TwoPhaseChain chain;
  chain.n = n;
  chain.kappa = 2.0 / t_v;
  chain.lambda = lambda;
  for (int s2 = 0; s2 <= n; ++s2)
    for (int s1 = 0; s1 <= s2; ++s1) chain.states.push_back({s1, s2});

  const auto size = static_cast<Eigen::Index>(chain.states.size());
  chain.generator = Eigen::MatrixXd::Zero(size, size);
  auto& t = chain.generator;
  const double k = chain.kappa;
  const double r1 = chain.r1;
  const double r2 = chain.r2;

  for (const auto& [s1, s2] : chain.states) {
    const int row = TwoPhaseChain::index_of(s1, s2);
    const int phase2 = s2 - s1;
    if (s1 >= 1) {
      t(row, TwoPhaseChain::index_of(s1 - 1, s2)) += s1 * (1.0 - r1) * k;
      t(row, TwoPhaseChain::index_of(s1 - 1, s2 - 1)) += s1 * r1 * k;
    }
    if (phase2 >= 1) {
      t(row, TwoPhaseChain::index_of(s1 + 1, s2)) += phase2 * (1.0 - r2) * k;
      t(row, TwoPhaseChain::index_of(s1, s2 - 1)) += phase2 * r2 * k;
    }
    if (s2 < n) {
      t(row, TwoPhaseChain::index_of(s1 + 1, s2 + 1)) += lambda;
      t(row, row) = -s2 * k - lambda;
    } else {
      t(row, row) = -s2 * k;
    }
  }
  return chain;
}

Eigen::VectorXd steady_state(const TwoPhaseChain& chain) {
  const auto size = chain.generator.rows();
  // Transposed balance equations with the last one replaced by sum(x) = 1.
  Eigen::MatrixXd a = chain.generator.transpose();
  a.row(size - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(size);
  b(size - 1) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (lu.rank() < size)
    throw SingularityError("steady_state: stationary vector is not unique");
  return lu.solve(b);
}

std::vector<double> occupancy_marginal(const TwoPhaseChain& chain,
                                       const Eigen::VectorXd& x) {
  std::vector<double> marginal(static_cast<std::size_t>(chain.n) + 1, 0.0);
  for (std::size_t i = 0; i < chain.states.size(); ++i)
    marginal[chain.states[i].s2] += x(static_cast<Eigen::Index>(i));
  return marginal;
}

double blocking_probability(const TwoPhaseChain& chain,
                            const Eigen::VectorXd& x) {
  return occupancy_marginal(chain, x).back();
}

double blocking_probability(const TwoPhaseChain& chain) {
  return blocking_probability(chain, steady_state(chain));
}

}  // namespace joap
