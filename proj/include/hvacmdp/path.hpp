#pragma once

#include <concepts>
#include <cstddef>
#include <vector>

#include "hvacmdp/policy.hpp"
#include "hvacmdp/random.hpp"

namespace hvacmdp {

struct PathStep {
  std::size_t stage = 0;
  std::size_t state = 0;
  std::size_t action = 0;
  double cost = 0.0;
  double pmv = 0.0;
  bool comfortable = true;
};

/// One simulated day.
struct SamplePath {
  std::vector<PathStep> steps;

  double total_cost() const {
    double c = 0.0;
    for (const auto& s : steps) c += s.cost;
    return c;
  }

  bool all_comfortable() const {
    for (const auto& s : steps)
      if (!s.comfortable) return false;
    return true;
  }
};

/// Policy change requested by a rollout: masking an uncomfortable pair, or reviving one in a dead row.
struct PolicyEdit {
  enum class Kind { Mask, Revive };
  Kind kind = Kind::Mask;
  std::size_t stage = 0;
  std::size_t state = 0;
  std::size_t action = 0;

  bool operator==(const PolicyEdit&) const = default;
};

/// Applies edits in order. A revive only fires on a row that is still empty.
inline void apply_edits(StochasticPolicy& policy, const std::vector<PolicyEdit>& edits) {
  for (const auto& e : edits) {
    if (e.kind == PolicyEdit::Kind::Mask) {
      policy.mask(e.stage, e.state, e.action);
    } else if (policy.mass(e.stage, e.state) == 0.0) {
      policy.materialize(e.stage, e.state)[e.action] = 1.0;
    }
  }
}

/// Anything that can draw sample paths of a finite-horizon MDP under a policy snapshot.
/// `generate_path` must not mutate shared state; it reports policy edits through `edits`
/// and throws InfeasibleError when no comfortable path exists.
template <class E>
concept PathEnvironment =
    requires(const E& env, const StochasticPolicy& policy, Rng& rng, std::vector<PolicyEdit>& edits) {
      { env.stages() } -> std::convertible_to<std::size_t>;
      { env.num_actions() } -> std::convertible_to<std::size_t>;
      { env.generate_path(policy, rng, edits) } -> std::same_as<SamplePath>;
    };

}  // namespace hvacmdp
