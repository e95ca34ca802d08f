#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hetjssp {

/// Integer time units. All scheduling arithmetic is exact.
using Time = std::int64_t;

/// Static JSSP data: job i visits machine machine_of(i, j) at its j-th
/// operation for proc_time(i, j) units. Matrices are stored row-major.
struct JsspInstance {
  int n_jobs = 0;
  int n_machines = 0;
  std::vector<int> machine_of;
  std::vector<Time> proc_time;
  std::string name;
  std::optional<Time> known_optimum;

  int op_count() const { return n_jobs * n_machines; }
  int node_id(int job, int pos) const { return job * n_machines + pos; }
  int job_of_node(int node) const { return node / n_machines; }
  int pos_of_node(int node) const { return node % n_machines; }
  int machine(int job, int pos) const { return machine_of[node_id(job, pos)]; }
  Time duration(int job, int pos) const { return proc_time[node_id(job, pos)]; }

  friend bool operator==(const JsspInstance&, const JsspInstance&) = default;
};

enum class ParseErrorKind {
  MalformedHeader,
  MissingJobLine,
  WrongPairCount,
  BadToken,
  NonPositiveDuration,
  MachineOutOfRange,
  RepeatedMachine,
  TrailingContent,
};

const char* to_string(ParseErrorKind kind);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, int line, const std::string& detail);
  ParseErrorKind kind() const { return kind_; }
  /// 1-based line number in the source text.
  int line() const { return line_; }

 private:
  ParseErrorKind kind_;
  int line_;
};

/// Parses the OR-library layout: a header "n m" followed by n lines of m
/// "machine duration" pairs. Machines are 0-based. Blank lines are ignored.
JsspInstance parse_instance(std::string_view text, std::string name = {});

/// Inverse of parse_instance.
std::string render_instance(const JsspInstance& inst);

/// Reads an instance file. Benchmarks with a published optimum (ft06, ft10)
/// get known_optimum filled in from their file stem.
JsspInstance load_instance(const std::filesystem::path& path);

/// Throws std::invalid_argument if any structural invariant is violated.
void validate(const JsspInstance& inst);

Time max_processing_time(const JsspInstance& inst);

/// Machine rows are uniform random permutations, durations uniform in
/// [p_min, p_max]. Deterministic in seed.
JsspInstance generate_random_instance(int n_jobs, int n_machines, Time p_min, Time p_max,
                                      std::uint64_t seed);

std::optional<Time> known_optimum_for(std::string_view name);

}  // namespace hetjssp
