#include "rankher/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace rankher {

namespace {

constexpr double kStepScale = 0.05;  // effector displacement per unit action

double l2(const Tensor& a, const Tensor& b, std::size_t n) {
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a.data[i] - b.data[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double clampd(double v, double lo, double hi) { return std::clamp(v, lo, hi); }

// Maps world coordinates in [0,1]^2 to fractional pixel centers of a panel.
struct Panel {
  double x0;
  std::size_t w, h;
  double px(double u) const { return x0 + u * (static_cast<double>(w) - 1) + 0.5; }
  double py(double v) const { return v * (static_cast<double>(h) - 1) + 0.5; }
};

}  // namespace

void GoalEnvSpec::validate() const {
  if (state_dim == 0 || action_dim == 0 || goal_dim == 0)
    throw std::invalid_argument("environment dimensions must be positive");
  if (horizon < 2) throw std::invalid_argument("horizon must be at least 2");
  if (action_lo.size() != action_dim || action_hi.size() != action_dim)
    throw std::invalid_argument("action bounds must match action_dim");
  if (success_epsilon <= 0) throw std::invalid_argument("success_epsilon must be positive");
  if (!(success_epsilon < workspace_diameter))
    throw std::invalid_argument("success_epsilon must be below workspace_diameter");
}

void GoalEnv::set_workspace_diameter(double d) {
  if (!(spec_.success_epsilon < d))
    throw std::invalid_argument("workspace_diameter must exceed success_epsilon");
  spec_.workspace_diameter = d;
}

std::pair<Tensor, Tensor> GoalEnv::reset(RngStream& rng) {
  auto [state, goal] = sample_initial(rng);
  state_ = state;
  desired_ = goal;
  t_ = 0;
  started_ = true;
  return {state_, desired_};
}

StepResult GoalEnv::step(const Tensor& action) {
  if (!started_) throw std::logic_error("step before reset");
  if (done()) throw std::logic_error("step after episode end");
  if (action.numel() != spec_.action_dim)
    throw std::invalid_argument("action has " + std::to_string(action.numel()) +
                                " dims, expected " + std::to_string(spec_.action_dim));
  Tensor a = action;
  bool clamped = false;
  for (std::size_t i = 0; i < spec_.action_dim; ++i) {
    const double c = clampd(a.data[i], spec_.action_lo[i], spec_.action_hi[i]);
    if (c != a.data[i]) clamped = true;
    a.data[i] = c;
  }
  state_ = advance(a);
  ++t_;
  StepResult r;
  r.next_state = state_;
  r.achieved_goal = achieved_goal(state_);
  r.reward = compute_reward(r.achieved_goal, desired_);
  r.done = done();
  r.clamped = clamped;
  return r;
}

double GoalEnv::compute_reward(const Tensor& achieved, const Tensor& desired) const {
  if (achieved.numel() != spec_.goal_dim || desired.numel() != spec_.goal_dim)
    throw std::invalid_argument("goal dimension mismatch in compute_reward");
  return l2(achieved, desired, spec_.goal_dim) < spec_.success_epsilon ? 0.0 : -1.0;
}

TerminalSummary GoalEnv::terminal_summary() const {
  if (!done()) throw std::logic_error("terminal_summary before episode end");
  TerminalSummary s;
  s.final_achieved_goal = achieved_goal(state_);
  s.desired_goal = desired_;
  s.final_reward = compute_reward(s.final_achieved_goal, desired_);
  fill_summary(s);
  return s;
}

// --- bit flip --------------------------------------------------------------

// n bits; a continuous action selects (by argmax) which bit to flip, with an
// extra final slot that holds the state unchanged. Without the hold action an
// episode whose initial Hamming distance mismatches the horizon's parity
// could never end on the goal, since every step would be forced to flip.
// Success epsilon 0.5 makes reward 0 exactly on full bitstring match.
class BitflipEnv final : public GoalEnv {
 public:
  explicit BitflipEnv(std::size_t n, std::size_t render_size)
      : GoalEnv(make_spec(n), render_size), n_(n) {}

  Tensor achieved_goal(const Tensor& state) const override { return state; }

  RenderedImage render_terminal(const Tensor& state) const override {
    RenderedImage img(render_size_, render_size_);
    const std::size_t cell = std::max<std::size_t>(1, img.width / n_);
    for (std::size_t i = 0; i < n_; ++i) {
      if (state.data[i] < 0.5) continue;
      for (std::size_t row = img.height / 4; row < 3 * img.height / 4; ++row)
        for (std::size_t col = i * cell; col < std::min(img.width, (i + 1) * cell); ++col)
          img.at(row, col) = 1.0;
    }
    return img;
  }

 protected:
  std::pair<Tensor, Tensor> sample_initial(RngStream& rng) override {
    Tensor state = Tensor::zeros({n_});
    for (auto& b : state.data) b = rng.uniform() < 0.5 ? 0.0 : 1.0;
    Tensor goal = Tensor::zeros({n_});
    do {
      for (auto& b : goal.data) b = rng.uniform() < 0.5 ? 0.0 : 1.0;
    } while (goal.data == state.data);
    return {state, goal};
  }

  Tensor advance(const Tensor& a) override {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n_ + 1; ++i)
      if (a.data[i] > a.data[best]) best = i;
    Tensor next = state_;
    if (best < n_) next.data[best] = 1.0 - next.data[best];
    return next;
  }

  void fill_summary(TerminalSummary& s) const override {
    s.hinge_angle = 0.0;
    s.ee_handle_distance = l2(s.final_achieved_goal, s.desired_goal, n_);
  }

 private:
  static GoalEnvSpec make_spec(std::size_t n) {
    GoalEnvSpec s;
    s.name = "bitflip" + std::to_string(n);
    s.state_dim = s.goal_dim = n;
    s.action_dim = n + 1;  // one slot per bit plus the hold action
    s.horizon = static_cast<int>(n);
    s.action_lo.assign(n + 1, -1.0);
    s.action_hi.assign(n + 1, 1.0);
    s.success_epsilon = 0.5;
    s.workspace_diameter = std::sqrt(static_cast<double>(n));
    return s;
  }
  std::size_t n_;
};

// --- planar tasks ----------------------------------------------------------

// Point effector on the unit square; moves by kStepScale * action per step.
class PlanarReachEnv final : public GoalEnv {
 public:
  explicit PlanarReachEnv(std::size_t render_size)
      : GoalEnv(make_spec(), render_size) {}

  Tensor achieved_goal(const Tensor& state) const override {
    return Tensor::vec({state.data[0], state.data[1]});
  }

  RenderedImage render_terminal(const Tensor& state) const override {
    RenderedImage img(render_size_, render_size_);
    Panel p{0.0, img.width, img.height};
    img.splat(p.px(state.data[0]), p.py(state.data[1]), 1.8, 1.0);
    img.clamp01();
    return img;
  }

 protected:
  std::pair<Tensor, Tensor> sample_initial(RngStream& rng) override {
    Tensor state = Tensor::vec({0.5, 0.5});
    Tensor goal = Tensor::vec({rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)});
    return {state, goal};
  }

  Tensor advance(const Tensor& a) override {
    Tensor next = state_;
    next.data[0] = clampd(next.data[0] + kStepScale * a.data[0], 0.0, 1.0);
    next.data[1] = clampd(next.data[1] + kStepScale * a.data[1], 0.0, 1.0);
    return next;
  }

  void fill_summary(TerminalSummary& s) const override {
    s.hinge_angle = 0.0;
    s.ee_handle_distance = l2(s.final_achieved_goal, s.desired_goal, 2);
  }

 private:
  static GoalEnvSpec make_spec() {
    GoalEnvSpec s;
    s.name = "planar_reach";
    s.state_dim = 2;
    s.action_dim = 2;
    s.goal_dim = 2;
    s.horizon = 50;
    s.action_lo = {-1, -1};
    s.action_hi = {1, 1};
    s.success_epsilon = 0.05;
    s.workspace_diameter = 1.0;
    return s;
  }
};

// Effector pushes a disc object: when the effector overlaps the contact
// radius, the object is displaced along the contact normal back to the radius.
class PlanarPushEnv final : public GoalEnv {
 public:
  explicit PlanarPushEnv(std::size_t render_size)
      : GoalEnv(make_spec(), render_size) {}

  static constexpr double kContact = 0.06;

  Tensor achieved_goal(const Tensor& state) const override {
    return Tensor::vec({state.data[2], state.data[3]});
  }

  RenderedImage render_terminal(const Tensor& state) const override {
    RenderedImage img(render_size_, render_size_);
    Panel p{0.0, img.width, img.height};
    img.splat(p.px(state.data[2]), p.py(state.data[3]), 1.8, 0.65);  // object
    img.splat(p.px(state.data[0]), p.py(state.data[1]), 1.8, 1.0);   // effector
    img.clamp01();
    return img;
  }

 protected:
  std::pair<Tensor, Tensor> sample_initial(RngStream& rng) override {
    Tensor state = Tensor::zeros({4});
    state.data[0] = 0.15;  // effector home
    state.data[1] = 0.5;
    state.data[2] = rng.uniform(0.35, 0.65);  // object
    state.data[3] = rng.uniform(0.35, 0.65);
    Tensor goal = Tensor::vec({rng.uniform(0.25, 0.75), rng.uniform(0.25, 0.75)});
    return {state, goal};
  }

  Tensor advance(const Tensor& a) override {
    Tensor next = state_;
    next.data[0] = clampd(next.data[0] + kStepScale * a.data[0], 0.0, 1.0);
    next.data[1] = clampd(next.data[1] + kStepScale * a.data[1], 0.0, 1.0);
    const double dx = next.data[2] - next.data[0];
    const double dy = next.data[3] - next.data[1];
    const double dist = std::sqrt(dx * dx + dy * dy);
    if (dist < kContact) {
      double nx = 1.0, ny = 0.0;
      if (dist > 1e-12) {
        nx = dx / dist;
        ny = dy / dist;
      }
      next.data[2] = clampd(next.data[0] + kContact * nx, 0.02, 0.98);
      next.data[3] = clampd(next.data[1] + kContact * ny, 0.02, 0.98);
    }
    return next;
  }

  void fill_summary(TerminalSummary& s) const override {
    s.hinge_angle = 0.0;
    const double dx = state_.data[0] - state_.data[2];
    const double dy = state_.data[1] - state_.data[3];
    s.ee_handle_distance = std::sqrt(dx * dx + dy * dy);
  }

 private:
  static GoalEnvSpec make_spec() {
    GoalEnvSpec s;
    s.name = "planar_push";
    s.state_dim = 4;
    s.action_dim = 2;
    s.goal_dim = 2;
    s.horizon = 50;
    s.action_lo = {-1, -1};
    s.action_hi = {1, 1};
    s.success_epsilon = 0.05;
    s.workspace_diameter = 1.0;
    return s;
  }
};

// Effector confined to the near half (x <= 0.5); contact imparts an impulse
// and the object coasts with per-step velocity decay 0.95. Goals lie in the
// far half, reachable only by sliding the object.
class PlanarSlideEnv final : public GoalEnv {
 public:
  explicit PlanarSlideEnv(std::size_t render_size)
      : GoalEnv(make_spec(), render_size) {}

  static constexpr double kContact = 0.06;
  static constexpr double kDecay = 0.95;

  Tensor achieved_goal(const Tensor& state) const override {
    return Tensor::vec({state.data[2], state.data[3]});
  }

  RenderedImage render_terminal(const Tensor& state) const override {
    RenderedImage img(render_size_, render_size_);
    Panel p{0.0, img.width, img.height};
    img.splat(p.px(state.data[2]), p.py(state.data[3]), 1.8, 0.65);  // object
    img.splat(p.px(state.data[0]), p.py(state.data[1]), 1.8, 1.0);   // effector
    img.clamp01();
    return img;
  }

 protected:
  std::pair<Tensor, Tensor> sample_initial(RngStream& rng) override {
    Tensor state = Tensor::zeros({6});
    state.data[0] = 0.15;  // effector home
    state.data[1] = 0.5;
    state.data[2] = 0.3;  // object starts in the near half
    state.data[3] = rng.uniform(0.3, 0.7);
    // velocity starts at zero
    Tensor goal = Tensor::vec({rng.uniform(0.55, 0.95), rng.uniform(0.1, 0.9)});
    return {state, goal};
  }

  Tensor advance(const Tensor& a) override {
    Tensor next = state_;
    const double ex0 = next.data[0], ey0 = next.data[1];
    next.data[0] = clampd(next.data[0] + kStepScale * a.data[0], 0.0, 0.5);
    next.data[1] = clampd(next.data[1] + kStepScale * a.data[1], 0.0, 1.0);
    const double dex = next.data[0] - ex0, dey = next.data[1] - ey0;
    const double dx = next.data[2] - next.data[0];
    const double dy = next.data[3] - next.data[1];
    const double dist = std::sqrt(dx * dx + dy * dy);
    if (dist < kContact) {
      double nx = 1.0, ny = 0.0;
      if (dist > 1e-12) {
        nx = dx / dist;
        ny = dy / dist;
      }
      const double speed = std::sqrt(dex * dex + dey * dey);
      next.data[4] = nx * speed;  // fresh impulse along the contact normal
      next.data[5] = ny * speed;
    }
    next.data[2] += next.data[4];
    next.data[3] += next.data[5];
    for (int axis = 0; axis < 2; ++axis) {
      double& pos = next.data[2 + axis];
      double& vel = next.data[4 + axis];
      if (pos < 0.02 || pos > 0.98) {
        pos = clampd(pos, 0.02, 0.98);
        vel = 0.0;
      }
      vel *= kDecay;
    }
    return next;
  }

  void fill_summary(TerminalSummary& s) const override {
    s.hinge_angle = 0.0;
    const double dx = state_.data[0] - state_.data[2];
    const double dy = state_.data[1] - state_.data[3];
    s.ee_handle_distance = std::sqrt(dx * dx + dy * dy);
  }

 private:
  static GoalEnvSpec make_spec() {
    GoalEnvSpec s;
    s.name = "planar_slide";
    s.state_dim = 6;
    s.action_dim = 2;
    s.goal_dim = 2;
    s.horizon = 50;
    s.action_lo = {-1, -1};
    s.action_hi = {1, 1};
    s.success_epsilon = 0.05;
    s.workspace_diameter = 1.0;
    return s;
  }
};

// --- door push -------------------------------------------------------------

// Effector in 3-space; the handle is placed uniformly inside a 0.30 m cube.
// Within the 0.03 m contact radius the effector leans on the handle: its
// forward (x) motion component drives the hinge angular velocity and the
// effector itself stays on the contact sphere, so sustained pushing opens the
// door smoothly. Goal is the desired hinge angle (1-d).
class DoorPush1dEnv final : public GoalEnv {
 public:
  explicit DoorPush1dEnv(std::size_t render_size)
      : GoalEnv(make_spec(), render_size) {}

  // Contact sphere sized so undirected exploration from the home position
  // finds the handle within a few dozen episodes; at 0.03 the sphere is
  // effectively invisible to noise-scale displacements and no replay scheme
  // can learn the task.
  static constexpr double kContact = 0.10;      // meters
  static constexpr double kHingeGain = 2.0;     // rad per meter of forward push
  static constexpr double kHingeMax = 1.5707963267948966;  // pi/2
  static constexpr double kCubeCenter[3] = {0.5, 0.5, 0.5};
  static constexpr double kCubeHalf = 0.15;  // 0.30 m cube
  static constexpr double kDoorLen = 0.36;   // drawn door panel length, meters

  Tensor achieved_goal(const Tensor& state) const override {
    return Tensor::vec({state.data[6]});
  }

  RenderedImage render_terminal(const Tensor& state) const override {
    RenderedImage img(render_size_, render_size_);
    const double ex = state.data[0], ey = state.data[1], ez = state.data[2];
    const double hx = state.data[3], hy = state.data[4], hz = state.data[5];
    const double th = state.data[6];
    const std::size_t half = img.width / 2;
    Panel top{0.0, half, img.height};                       // x-y view
    Panel side{static_cast<double>(half), half, img.height};  // x-z view

    // door panel, hinged below the handle, swinging toward +x as it opens
    const double pvx = hx, pvy = hy - kDoorLen / 2;
    const double tipx = pvx + kDoorLen * std::sin(th);
    const double tipy = pvy + kDoorLen * std::cos(th);
    img.line(top.px(pvx), top.py(pvy), top.px(tipx), top.py(tipy), 0.9, 0.45);
    // side view: the door's swung leading edge
    const double edge = hx + kDoorLen * std::sin(th);
    img.line(side.px(edge), side.py(clampd(hz - 0.15, 0.0, 1.0)), side.px(edge),
             side.py(clampd(hz + 0.15, 0.0, 1.0)), 0.9, 0.3);

    img.splat(top.px(hx), top.py(hy), 1.8, 0.7);   // handle
    img.splat(side.px(hx), side.py(hz), 1.8, 0.7);
    img.splat(top.px(ex), top.py(ey), 1.8, 1.0);   // effector
    img.splat(side.px(ex), side.py(ez), 1.8, 1.0);

    // hinge gauge: rightmost column, one pixel per 0.05 rad from the bottom
    const std::size_t ticks = std::min(
        img.height, static_cast<std::size_t>(std::floor(th / 0.05)));
    for (std::size_t i = 0; i < ticks; ++i) {
      double& px = img.at(img.height - 1 - i, img.width - 1);
      px = std::max(px, 0.85);
    }
    img.clamp01();
    return img;
  }

 protected:
  std::pair<Tensor, Tensor> sample_initial(RngStream& rng) override {
    Tensor state = Tensor::zeros({7});
    state.data[0] = 0.30;  // effector home
    state.data[1] = 0.5;
    state.data[2] = 0.5;
    for (int i = 0; i < 3; ++i)
      state.data[3 + i] =
          rng.uniform(kCubeCenter[i] - kCubeHalf, kCubeCenter[i] + kCubeHalf);
    state.data[6] = 0.0;  // door closed
    Tensor goal = Tensor::vec({rng.uniform(0.10, 1.20)});
    return {state, goal};
  }

  Tensor advance(const Tensor& a) override {
    Tensor next = state_;
    const double ex0 = next.data[0];
    double tent[3];
    for (int i = 0; i < 3; ++i)
      tent[i] = clampd(next.data[i] + kStepScale * a.data[i], 0.0, 1.0);
    const double hx = next.data[3], hy = next.data[4], hz = next.data[5];
    const double ddx = tent[0] - hx, ddy = tent[1] - hy, ddz = tent[2] - hz;
    const double dist = std::sqrt(ddx * ddx + ddy * ddy + ddz * ddz);
    if (dist < kContact) {
      next.data[6] = clampd(next.data[6] + kHingeGain * (tent[0] - ex0), 0.0,
                            kHingeMax);
      // effector leans on the contact sphere, staying on its approach side
      double ox = next.data[0] - hx, oy = next.data[1] - hy, oz = next.data[2] - hz;
      double olen = std::sqrt(ox * ox + oy * oy + oz * oz);
      if (olen < 1e-12) {
        ox = -1.0;
        oy = 0.0;
        oz = 0.0;
        olen = 1.0;
      }
      next.data[0] = hx + kContact * ox / olen;
      next.data[1] = hy + kContact * oy / olen;
      next.data[2] = hz + kContact * oz / olen;
    } else {
      next.data[0] = tent[0];
      next.data[1] = tent[1];
      next.data[2] = tent[2];
    }
    return next;
  }

  void fill_summary(TerminalSummary& s) const override {
    s.hinge_angle = state_.data[6];
    const double dx = state_.data[0] - state_.data[3];
    const double dy = state_.data[1] - state_.data[4];
    const double dz = state_.data[2] - state_.data[5];
    s.ee_handle_distance = std::sqrt(dx * dx + dy * dy + dz * dz);
  }

 private:
  static GoalEnvSpec make_spec() {
    GoalEnvSpec s;
    s.name = "door_push_1d";
    s.state_dim = 7;
    s.action_dim = 3;
    s.goal_dim = 1;
    s.horizon = 50;
    s.action_lo = {-1, -1, -1};
    s.action_hi = {1, 1, 1};
    s.success_epsilon = 0.05;  // radians
    s.workspace_diameter = 0.6;
    s.has_hinge = true;
    return s;
  }
};

std::unique_ptr<GoalEnv> make_env(const std::string& name, std::size_t render_size) {
  if (name.rfind("bitflip", 0) == 0 && name.size() > 7) {
    const long n = std::strtol(name.c_str() + 7, nullptr, 10);
    if (n < 2 || n > 64)
      throw std::invalid_argument("bitflip size out of range: " + name);
    return std::make_unique<BitflipEnv>(static_cast<std::size_t>(n), render_size);
  }
  if (name == "planar_reach") return std::make_unique<PlanarReachEnv>(render_size);
  if (name == "planar_push") return std::make_unique<PlanarPushEnv>(render_size);
  if (name == "planar_slide") return std::make_unique<PlanarSlideEnv>(render_size);
  if (name == "door_push_1d") return std::make_unique<DoorPush1dEnv>(render_size);
  throw std::invalid_argument("unknown environment: " + name);
}

}  // namespace rankher
