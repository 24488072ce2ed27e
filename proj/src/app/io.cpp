#include "ihoc/app/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <system_error>

#include <unistd.h>

namespace ihoc::app {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";   // also folds -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot move '" + tmp.string() + "' to '" + path + "': " + ec.message());
  }
}

void write_json_atomic(const std::string& path, const Json& doc) {
  write_file_atomic(path, doc.dump(2) + "\n");
}

std::string csv_document(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string trajectory_csv(double dt, const std::vector<std::string>& state_names,
                           const std::vector<std::string>& control_names,
                           const std::vector<Vector>& states, const std::vector<Vector>& controls,
                           const std::vector<double>& stage_costs, const std::vector<int>& phase) {
  std::vector<std::string> header{"t_seconds"};
  header.insert(header.end(), state_names.begin(), state_names.end());
  header.insert(header.end(), control_names.begin(), control_names.end());
  header.push_back("stage_cost");
  header.push_back("phase");

  const Index nu = static_cast<Index>(control_names.size());
  std::vector<std::vector<std::string>> rows;
  rows.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    std::vector<std::string> row{format_number(static_cast<double>(i) * dt)};
    for (Index k = 0; k < states[i].size(); ++k) row.push_back(format_number(states[i][k]));
    const bool has_control = i < controls.size();
    for (Index k = 0; k < nu; ++k) row.push_back(format_number(has_control ? controls[i][k] : 0.0));
    row.push_back(format_number(i < stage_costs.size() ? stage_costs[i] : 0.0));
    const int ph = i < phase.size() ? phase[i] : (phase.empty() ? 1 : phase.back());
    row.push_back(std::to_string(ph));
    rows.push_back(std::move(row));
  }
  return csv_document(header, rows);
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  const double nan = std::nan("");
  std::vector<std::vector<std::string>> rows;
  for (const SweepPoint& p : points) {
    rows.push_back({format_number(p.T), format_number(p.ok ? p.ilqr_phase_cost : nan),
                    format_number(p.ok ? p.regulation_cost : nan),
                    format_number(p.ok ? p.terminal_value : nan),
                    format_number(p.ok ? p.total_cost : nan), p.in_omega ? "1" : "0",
                    format_number(p.ok ? p.final_state_error.norm() : nan)});
  }
  return csv_document({"T", "ilqr_cost", "regulation_cost", "terminal_value", "total_cost",
                       "in_omega", "error_norm"},
                      rows);
}

std::string iteration_csv(const std::vector<IterationRecord>& log) {
  std::vector<std::vector<std::string>> rows;
  for (const IterationRecord& r : log) {
    rows.push_back({std::to_string(r.iteration), format_number(r.cost), format_number(r.alpha),
                    format_number(r.lambda), format_number(r.gradient_norm)});
  }
  return csv_document({"iteration", "cost", "alpha", "lambda", "gradient_norm"}, rows);
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const ConvergenceRow& r : rows) {
    cells.push_back({format_number(r.M), format_number(r.cost), format_number(r.optimal),
                     format_number(r.gap), format_number(r.transfer_time)});
  }
  return csv_document({"M", "cost", "optimal", "gap", "transfer_time"}, cells);
}

Json to_json(const Vector& v) {
  Json j = Json::array();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      j.push_back(v[i]);
    } else {
      j.push_back(nullptr);
    }
  }
  return j;
}

}  // namespace ihoc::app
