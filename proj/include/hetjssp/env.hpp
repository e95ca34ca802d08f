#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetjssp/instance.hpp"

namespace hetjssp {

/// Boolean entry per operation node (node id = job * n_machines + pos).
using ActionMask = std::vector<bool>;

/// Dynamic scheduling state. Per-op vectors are indexed by node id.
struct ScheduleState {
  std::vector<int> next_pos;
  std::vector<bool> op_scheduled;
  std::vector<Time> op_start;
  std::vector<Time> op_completion;
  std::vector<Time> machine_ready;
  std::vector<Time> job_ready;
  int steps_taken = 0;
  Time prev_lower_bound = 0;

  int op_count() const { return static_cast<int>(op_scheduled.size()); }
  bool terminal() const { return steps_taken == op_count(); }

  friend bool operator==(const ScheduleState&, const ScheduleState&) = default;
};

struct StepResult {
  double reward = 0.0;
  bool done = false;
};

/// Thrown when an action is not eligible under the current mask.
class InvalidAction : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Constant per-step penalty subtracted from the lower-bound difference.
inline constexpr double kStepPenalty = 0.1;

ScheduleState reset(const JsspInstance& inst);

ActionMask action_mask(const ScheduleState& state, const JsspInstance& inst);

/// Schedules node `action` at max(job ready, machine ready) and returns the
/// shaped reward prev_lb - lb - 0.1.
StepResult step(ScheduleState& state, int action, const JsspInstance& inst);

/// max(max_k machine_ready, max_i job_ready + remaining work of job i).
Time lower_bound(const ScheduleState& state, const JsspInstance& inst);

/// Maximum completion time. Requires a terminal state.
Time makespan(const ScheduleState& state);

/// Throws std::logic_error if precedence, duration, or machine-capacity
/// invariants are violated.
void check_feasible(const ScheduleState& state, const JsspInstance& inst);

/// Replays a full dispatch sequence from reset.
ScheduleState replay(const JsspInstance& inst, const std::vector<int>& actions);

/// CSV rows: job,pos,machine,start,completion for every scheduled op.
std::string schedule_csv(const ScheduleState& state, const JsspInstance& inst);

}  // namespace hetjssp
