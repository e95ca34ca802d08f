#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "hetjssp/env.hpp"
#include "hetjssp/instance.hpp"

namespace hetjssp {

struct Arc {
  int src = 0;
  int dst = 0;
  friend bool operator==(const Arc&, const Arc&) = default;
};

inline constexpr int kNodeFeatures = 3;

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, kNodeFeatures, Eigen::RowMajor>;

/// Operation-only disjunctive graph with two typed arc sets. Node id of
/// (job i, position j) is i * n_machines + j; there are no source/sink nodes.
/// Each machine-sharing pair appears in `competes` as two opposite arcs.
struct HeteroGraph {
  int node_count = 0;
  int n_jobs = 0;
  int n_machines = 0;
  std::vector<Arc> precedes;
  std::vector<Arc> competes;
  /// Columns: normalized duration, completion / global time, scheduled flag.
  FeatureMatrix features;

  int node_of(int job, int pos) const { return job * n_machines + pos; }
  int job_of(int node) const { return node / n_machines; }
  int pos_of(int node) const { return node % n_machines; }
};

HeteroGraph build_graph(const JsspInstance& inst);

/// Recomputes the full feature matrix from `state`. Global time is the
/// largest completion among scheduled ops (0 before the first step).
void update_features(HeteroGraph& g, const ScheduleState& state, const JsspInstance& inst);

/// precedes followed by competes, i.e. the edge set with relation types erased.
std::vector<Arc> merged_arcs(const HeteroGraph& g);

/// One row per node: id,job,pos,machine,f0,f1,f2.
std::string features_csv(const HeteroGraph& g, const JsspInstance& inst);

/// One row per arc: relation,src,dst.
std::string arcs_csv(const HeteroGraph& g);

}  // namespace hetjssp
