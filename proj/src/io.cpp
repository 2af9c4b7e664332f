#include "saddle/io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace saddle {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json vec_to_json(const Vec& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json frame_to_json(const std::vector<Vec>& vectors) {
  ordered_json a = ordered_json::array();
  for (const Vec& v : vectors) a.push_back(vec_to_json(v));
  return a;
}

Vec vec_from_json(const ordered_json& a) {
  if (!a.is_array()) throw input_error("trajectory line: expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_trajectory_jsonl(const Problem& problem, const Trajectory& traj, std::ostream& out) {
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const SaddleState& s = traj.states[n];
    const bool have_diag = n >= 1 && n - 1 < traj.diagnostics.size();
    ordered_json line;
    line["n"] = s.n;
    line["t"] = s.t;
    line["x"] = vec_to_json(s.x);
    line["v"] = frame_to_json(s.frame.vectors);
    line["l"] = s.l.value;
    line["residual"] = have_diag ? traj.diagnostics[n - 1].residual : saddle_residual(problem, s);
    out << line.dump() << "\n";
  }
}

void write_trajectory_jsonl(const Problem& problem, const Trajectory& traj,
                            const std::filesystem::path& path) {
  auto out = open_out(path);
  write_trajectory_jsonl(problem, traj, out);
}

void write_extrapolated_jsonl(const Problem& problem, const ExtrapolatedTrajectory& traj,
                              std::ostream& out) {
  for (const ExtrapolatedState& s : traj.states) {
    ordered_json line;
    line["n"] = s.n;
    line["t"] = s.t;
    line["x"] = vec_to_json(s.x);
    line["v"] = frame_to_json(s.directions.vectors);
    line["residual"] = eval_force(problem, s.x).norm();
    line["extrapolated"] = true;
    out << line.dump() << "\n";
  }
}

void write_extrapolated_jsonl(const Problem& problem, const ExtrapolatedTrajectory& traj,
                              const std::filesystem::path& path) {
  auto out = open_out(path);
  write_extrapolated_jsonl(problem, traj, out);
}

std::vector<StateRecord> read_states_jsonl(std::istream& in) {
  std::vector<StateRecord> records;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    ordered_json doc;
    try {
      doc = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw input_error("trajectory line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("n") || !doc.contains("t") || !doc.contains("x") ||
        !doc.contains("v")) {
      throw input_error("trajectory line " + std::to_string(line_no) + ": missing fields");
    }
    StateRecord rec;
    rec.state.n = doc.at("n").get<long>();
    rec.state.t = doc.at("t").get<double>();
    rec.state.x = vec_from_json(doc.at("x"));
    for (const auto& entry : doc.at("v")) {
      rec.state.frame.vectors.push_back(vec_from_json(entry));
    }
    if (doc.contains("l")) rec.state.l.value = doc.at("l").get<double>();
    if (doc.contains("residual")) rec.residual = doc.at("residual").get<double>();
    rec.extrapolated = doc.value("extrapolated", false);
    records.push_back(std::move(rec));
  }
  if (!records.empty() && !records.front().extrapolated) {
    const double l0 = records.front().state.l.value;
    for (StateRecord& rec : records) rec.state.l.initial = l0;
  }
  return records;
}

std::vector<StateRecord> read_states_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open " + path.string());
  return read_states_jsonl(in);
}

}  // namespace saddle
