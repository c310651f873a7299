#include "sequtil/policy.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace sequtil {

MemorylessPolicy MemorylessPolicy::uniform(const Cmp& cmp) {
  MemorylessPolicy pi;
  pi.probabilities = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cmp.num_states()),
                                           static_cast<Eigen::Index>(cmp.num_actions()));
  for (StateIndex s = 0; s < cmp.num_states(); ++s) {
    std::vector<ActionIndex> legal;
    for (ActionIndex a = 0; a < cmp.num_actions(); ++a) {
      if (cmp.is_legal(s, a)) legal.push_back(a);
    }
    for (ActionIndex a : legal) {
      pi.probabilities(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) =
          1.0 / static_cast<double>(legal.size());
    }
  }
  return pi;
}

MemorylessPolicy MemorylessPolicy::deterministic(
    const Cmp& cmp, const std::vector<std::optional<ActionIndex>>& actions) {
  if (actions.size() != cmp.num_states()) {
    throw std::invalid_argument("deterministic policy needs one entry per state");
  }
  MemorylessPolicy pi;
  pi.probabilities = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cmp.num_states()),
                                           static_cast<Eigen::Index>(cmp.num_actions()));
  for (StateIndex s = 0; s < actions.size(); ++s) {
    if (actions[s]) {
      pi.probabilities(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(*actions[s])) = 1.0;
    }
  }
  return pi;
}

std::optional<ActionIndex> MemorylessPolicy::action(StateIndex s) const {
  std::optional<ActionIndex> best;
  double best_p = 0.0;
  for (Eigen::Index a = 0; a < probabilities.cols(); ++a) {
    const double p = probabilities(static_cast<Eigen::Index>(s), a);
    if (p > best_p) {
      best_p = p;
      best = static_cast<ActionIndex>(a);
    }
  }
  return best;
}

std::vector<std::string> validate_policy(const Cmp& cmp, const MemorylessPolicy& pi) {
  std::vector<std::string> problems;
  if (pi.probabilities.rows() != static_cast<Eigen::Index>(cmp.num_states()) ||
      pi.probabilities.cols() != static_cast<Eigen::Index>(cmp.num_actions())) {
    problems.push_back("policy shape does not match the CMP");
    return problems;
  }
  for (StateIndex s = 0; s < cmp.num_states(); ++s) {
    double total = 0.0;
    for (ActionIndex a = 0; a < cmp.num_actions(); ++a) {
      const double p = pi.probabilities(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
      if (p < 0.0) problems.push_back("negative probability at state " + cmp.state_name(s));
      if (p > 0.0 && !cmp.is_legal(s, a)) {
        problems.push_back("illegal action " + cmp.action_name(a) + " at state " + cmp.state_name(s));
      }
      total += p;
    }
    const bool dead_end = !cmp.has_legal_action(s);
    if (dead_end ? total != 0.0 : std::abs(total - 1.0) > 1e-9) {
      problems.push_back("action probabilities at state " + cmp.state_name(s) + " sum to " +
                         std::to_string(total));
    }
  }
  return problems;
}

namespace {

class Draws {
 public:
  explicit Draws(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) from the top 53 bits.
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

Trajectory sample_one(const Cmp& cmp, StateIndex start, const MemorylessPolicy& pi, Draws& draws,
                      std::size_t max_len) {
  Trajectory tau(start);
  while (tau.size() < max_len) {
    const StateIndex s = tau.end();
    std::optional<ActionIndex> action;
    double u = draws.next();
    double mass = 0.0;
    for (ActionIndex a = 0; a < cmp.num_actions(); ++a) {
      const double p = pi.probabilities(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a));
      if (p <= 0.0) continue;
      action = a;
      mass += p;
      if (u < mass) break;
    }
    if (!action) break;

    double total = 0.0;
    for (const auto& o : cmp.outcomes(s, *action)) total += std::max(o.probability, 0.0);
    if (total <= 0.0) break;
    u = draws.next() * total;
    mass = 0.0;
    const Outcome* chosen = nullptr;
    for (const auto& o : cmp.outcomes(s, *action)) {
      if (o.probability <= 0.0) continue;
      chosen = &o;
      mass += o.probability;
      if (u < mass) break;
    }
    tau = tau.extended({s, *action, chosen->next});
    if (draws.next() < chosen->termination) break;
  }
  return tau;
}

}  // namespace

Trajectory sample_trajectory(const Cmp& cmp, StateIndex start, const MemorylessPolicy& pi,
                             std::uint64_t seed, std::size_t max_len) {
  return sample_trajectories(cmp, start, pi, seed, max_len, 1).front();
}

std::vector<Trajectory> sample_trajectories(const Cmp& cmp, StateIndex start,
                                            const MemorylessPolicy& pi, std::uint64_t seed,
                                            std::size_t max_len, std::size_t count) {
  if (start >= cmp.num_states()) throw std::invalid_argument("start state is not declared");
  if (auto problems = validate_policy(cmp, pi); !problems.empty()) {
    throw std::invalid_argument("policy is not legal for this CMP: " + problems.front());
  }
  Draws draws(seed);
  std::vector<Trajectory> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample_one(cmp, start, pi, draws, max_len));
  return out;
}

}  // namespace sequtil
