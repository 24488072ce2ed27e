#pragma once

#include <string>
#include <vector>

#include "ihoc/acocp.hpp"
#include "ihoc/app/config.hpp"

namespace ihoc::app {

inline constexpr const char* kSummarySchema = "ihoc.summary/1";
inline constexpr const char* kTrajectorySchema = "ihoc.trajectory/1";
inline constexpr const char* kSweepSchema = "ihoc.sweep/1";
inline constexpr const char* kIterationSchema = "ihoc.iterations/1";
inline constexpr const char* kConvergenceSchema = "ihoc.convergence/1";

/// Shortest representation that reads back to the same double; independent
/// of the C/C++ locale. Non-finite values print as nan/inf/-inf.
std::string format_number(double v);

/// Writes through a temporary file in the same directory and renames it over
/// the target, so readers never see a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

void write_json_atomic(const std::string& path, const Json& doc);

/// Rows of already formatted cells under a header; '\n' line endings.
std::string csv_document(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

/// t_seconds, states..., controls..., stage_cost, phase. The final state row
/// carries zero controls and zero stage cost.
std::string trajectory_csv(double dt, const std::vector<std::string>& state_names,
                           const std::vector<std::string>& control_names,
                           const std::vector<Vector>& states, const std::vector<Vector>& controls,
                           const std::vector<double>& stage_costs, const std::vector<int>& phase);

/// T, ilqr_cost, regulation_cost, terminal_value, total_cost, in_omega, error_norm.
std::string sweep_csv(const std::vector<SweepPoint>& points);

/// iteration, cost, alpha, lambda, gradient_norm.
std::string iteration_csv(const std::vector<IterationRecord>& log);

/// M, cost, optimal, gap, transfer_time.
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

Json to_json(const Vector& v);

}  // namespace ihoc::app
