#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "saddle/dynamics.hpp"
#include "saddle/extrapolation.hpp"

namespace saddle {

/// One state per line: {"n", "t", "x", "v", "l", "residual"}; doubles are
/// written shortest-round-trip so a re-read compares bit-equal.
void write_trajectory_jsonl(const Problem& problem, const Trajectory& traj, std::ostream& out);
void write_trajectory_jsonl(const Problem& problem, const Trajectory& traj,
                            const std::filesystem::path& path);

/// Same line format with "extrapolated": true; no dimer length exists for the
/// combined pair, so "l" is omitted.
void write_extrapolated_jsonl(const Problem& problem, const ExtrapolatedTrajectory& traj,
                              std::ostream& out);
void write_extrapolated_jsonl(const Problem& problem, const ExtrapolatedTrajectory& traj,
                              const std::filesystem::path& path);

struct StateRecord {
  SaddleState state;
  double residual = 0.0;
  bool extrapolated = false;
};

/// Parses lines written by the writers above; throws input_error on malformed
/// input. For plain trajectories the dimer length's initial value is restored
/// from the first line.
std::vector<StateRecord> read_states_jsonl(std::istream& in);
std::vector<StateRecord> read_states_jsonl(const std::filesystem::path& path);

}  // namespace saddle
