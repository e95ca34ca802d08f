#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetjssp/instance.hpp"
#include "hetjssp/nn/policy.hpp"

namespace hetjssp {

/// One greedy episode: always the valid op with the largest logit (lowest
/// node id on ties). Optionally reports the dispatch sequence.
Time greedy_rollout(nn::PolicyModel& model, const JsspInstance& inst, std::vector<int>* sequence = nullptr);

/// `episodes` greedy rollouts in eval mode. The environment and policy are
/// deterministic, so every entry is identical; spread across runs comes
/// from training seeds.
std::vector<Time> evaluate(nn::PolicyModel& model, const JsspInstance& inst, int episodes = 50);

double mean_of(std::span<const double> xs);
/// Sample standard deviation (n - 1). Zero for fewer than two values.
double sample_std(std::span<const double> xs);

/// 100 * (achieved - optimum) / optimum.
double optimality_gap(double achieved, double optimum);

/// 100 * (baseline - ours) / baseline; positive when ours is lower.
double relative_improvement(double baseline, double ours);

struct EvalResult {
  std::string instance;
  std::string method;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<double>> per_seed_makespans;
  std::vector<double> seed_means;
  double mean = 0;
  double std = 0;
  std::optional<double> optimum;
  std::optional<double> gap;      // of the grand mean
  std::optional<double> gap_std;  // sample std of per-seed gaps
};

EvalResult aggregate(std::string instance, std::string method, std::vector<std::uint64_t> seeds,
                     std::vector<std::vector<double>> per_seed_makespans, std::optional<double> optimum);

struct TTestResult {
  double t = 0;
  double p = 1;
  /// Differences had zero variance; p is 1 when they are all zero and 0
  /// otherwise (t is then +-inf).
  bool degenerate = false;
  double mean_difference = 0;
};

/// Paired two-tailed Student t-test on a - b with n - 1 degrees of freedom.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

/// I_x(a, b) via the Lentz continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_tailed_p(double t, double dof);

/// "**" for p < 0.01, "*" for p < 0.05, "" otherwise.
std::string significance_stars(double p);

struct Comparison {
  std::string instance;
  std::string reference;
  std::string baseline;
  double delta_percent = 0;
  double reference_mean = 0;
  double baseline_mean = 0;
  TTestResult test;
};

/// Compares `reference` against `baseline` pairing per-seed means by seed
/// position. A baseline with a single seed (a deterministic rule) is
/// broadcast as a constant vector.
Comparison compare(const EvalResult& reference, const EvalResult& baseline);

struct CurveRow {
  long env_steps = 0;
  std::uint64_t seed = 0;
  std::string arch;
  std::string instance;
  double eval_mean = 0;
  double eval_std = 0;
};

/// instance,method,seeds,mean,std,optimum,gap_pct,gap_std_pct
std::string results_csv(const std::vector<EvalResult>& results);
/// instance,reference,baseline,delta_pct,reference_mean,baseline_mean,t,p,degenerate
std::string ttests_csv(const std::vector<Comparison>& comparisons);
/// env_steps,seed,arch,instance,eval_mean,eval_std
std::string curves_csv(const std::vector<CurveRow>& rows);

/// Markdown report: a makespan table (mean +- std, gap, stars from
/// `comparisons` against the reference method) followed by a significance
/// table. The gap column is omitted when no result has an optimum.
std::string results_markdown(const std::vector<EvalResult>& results, const std::vector<Comparison>& comparisons);

}  // namespace hetjssp
