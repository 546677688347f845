#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "rankher/image.hpp"
#include "rankher/rng.hpp"
#include "rankher/tensor.hpp"

namespace rankher {

// Static description of a goal-conditioned task.
struct GoalEnvSpec {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::size_t goal_dim = 0;
  int horizon = 0;
  std::vector<double> action_lo, action_hi;  // per-dimension bounds
  double success_epsilon = 0.0;              // task units
  double workspace_diameter = 0.0;           // scale of the ranking distance bands
  bool has_hinge = false;                    // door-style task: rank by
                                             // effector-handle distance and
                                             // treat hinge opening as success
  void validate() const;
};

struct StepResult {
  Tensor next_state;
  Tensor achieved_goal;
  double reward = -1.0;  // 0 on success, -1 otherwise
  bool done = false;
  bool clamped = false;  // action was out of bounds and got clamped
};

// End-of-episode facts consumed by ranking and logging.
struct TerminalSummary {
  double hinge_angle = 0.0;         // radians; 0 for tasks without a door
  double ee_handle_distance = 0.0;  // effector to handle/object (goal for
                                    // tasks with no manipulated object)
  Tensor final_achieved_goal;
  Tensor desired_goal;
  double final_reward = -1.0;
};

class GoalEnv {
 public:
  virtual ~GoalEnv() = default;

  const GoalEnvSpec& spec() const { return spec_; }
  void set_workspace_diameter(double d);

  // Samples a desired goal and initial state; returns (state, goal).
  std::pair<Tensor, Tensor> reset(RngStream& rng);

  // Advances one step. Out-of-bounds actions are clamped (flagged in the
  // result). Stepping a finished episode is a usage error.
  StepResult step(const Tensor& action);

  // Pure: 0 if the goals are within success_epsilon (L2), else -1.
  double compute_reward(const Tensor& achieved, const Tensor& desired) const;

  virtual Tensor achieved_goal(const Tensor& state) const = 0;
  virtual RenderedImage render_terminal(const Tensor& state) const = 0;

  // Only valid once the episode is done.
  TerminalSummary terminal_summary() const;

  const Tensor& state() const { return state_; }
  const Tensor& desired() const { return desired_; }
  bool done() const { return started_ && t_ >= spec_.horizon; }
  int t() const { return t_; }
  std::size_t render_size() const { return render_size_; }

 protected:
  GoalEnv(GoalEnvSpec spec, std::size_t render_size)
      : spec_(std::move(spec)), render_size_(render_size) {
    spec_.validate();
  }
  virtual std::pair<Tensor, Tensor> sample_initial(RngStream& rng) = 0;
  virtual Tensor advance(const Tensor& clamped_action) = 0;
  // Fills hinge_angle / ee_handle_distance from the final state.
  virtual void fill_summary(TerminalSummary& s) const = 0;

  GoalEnvSpec spec_;
  Tensor state_;
  Tensor desired_;
  int t_ = 0;
  bool started_ = false;
  std::size_t render_size_ = 32;
};

// One finished rollout, the unit the ranking/relabeling pipeline consumes.
struct Episode {
  int episode_id = 0;
  Tensor desired_goal;
  std::vector<Tensor> states;    // horizon + 1 entries
  std::vector<Tensor> actions;   // horizon entries
  std::vector<double> rewards;   // horizon entries
  std::vector<Tensor> achieved;  // horizon + 1 entries, aligned with states
  TerminalSummary summary;
  int steps() const { return static_cast<int>(actions.size()); }
};

// Known names: bitflip<N> (e.g. bitflip12), planar_reach, planar_push,
// planar_slide, door_push_1d. Unknown names throw.
std::unique_ptr<GoalEnv> make_env(const std::string& name,
                                  std::size_t render_size = 32);

}  // namespace rankher
