#pragma once

#include "evodyn/approximation.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace evodyn::io {

/// %.17g: round-trips every double.
std::string format_double(double x);

/// Numeric CSV; blank lines and lines starting with '#' are skipped. Throws
/// ValidationError naming the file and line on malformed cells.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path);

/// All values of a numeric CSV in row-major order (for vectors written either
/// as one row or one column).
Vector read_vector_csv(const std::filesystem::path& path);

/// Row i holds f(s_i, s_j) over columns j.
PayoffKernel load_table_kernel_csv(const std::filesystem::path& path, const StrategyGrid& grid);

/// Header `t,<s_1>,...,<s_n>`, then one row of CDF values per sample.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

/// Header `t,nash_gap,storage,sigma,mass_error`.
void write_diagnostics_csv(std::ostream& out, const Trajectory& trajectory);

/// Header `n_coarse,n_fine,sup_bl,t_of_max`.
void write_refine_csv(std::ostream& out, const RefineReport& report);

struct CdfTable {
  std::vector<double> grid;  // parsed from the header
  std::vector<double> times;
  std::vector<Vector> cdfs;
};

CdfTable read_trajectory_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace evodyn::io
