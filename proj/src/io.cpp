#include "evodyn/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace evodyn::io {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& raw, const std::filesystem::path& path, std::size_t line_no) {
  const auto first = raw.find_first_not_of(" \t\r");
  const auto last = raw.find_last_not_of(" \t\r");
  if (first == std::string::npos)
    throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": empty cell");
  const std::string cell = raw.substr(first, last - first + 1);
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE)
    throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return in;
}

bool skip_line(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

}  // namespace

std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    std::vector<double> row;
    for (const std::string& cell : split_cells(line)) row.push_back(parse_cell(cell, path, line_no));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector read_vector_csv(const std::filesystem::path& path) {
  std::vector<double> flat;
  for (const auto& row : read_numeric_csv(path)) flat.insert(flat.end(), row.begin(), row.end());
  if (flat.empty()) throw ValidationError(path.string() + ": no values");
  return Eigen::Map<const Vector>(flat.data(), static_cast<Index>(flat.size()));
}

PayoffKernel load_table_kernel_csv(const std::filesystem::path& path, const StrategyGrid& grid) {
  const auto rows = read_numeric_csv(path);
  const Index n = grid.size();
  if (static_cast<Index>(rows.size()) != n)
    throw ValidationError(path.string() + ": expected " + std::to_string(n) + " rows, found " +
                          std::to_string(rows.size()));
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != n)
      throw ValidationError(path.string() + ": row " + std::to_string(i + 1) + " has " +
                            std::to_string(row.size()) + " columns, expected " + std::to_string(n));
    for (Index j = 0; j < n; ++j) a(i, j) = row[static_cast<std::size_t>(j)];
  }
  return kernel_table(grid, std::move(a));
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  if (trajectory.states.empty()) return;
  const StrategyGrid& grid = trajectory.states.front().grid();
  out << 't';
  for (Index i = 0; i < grid.size(); ++i) out << ',' << format_double(grid[i]);
  out << '\n';
  for (std::size_t k = 0; k < trajectory.states.size(); ++k) {
    out << format_double(trajectory.times[k]);
    const Vector c = cdf(trajectory.states[k]);
    for (Index i = 0; i < c.size(); ++i) out << ',' << format_double(c(i));
    out << '\n';
  }
}

void write_diagnostics_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "t,nash_gap,storage,sigma,mass_error\n";
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    const SampleDiagnostics& d = trajectory.diagnostics[k];
    out << format_double(trajectory.times[k]) << ',' << format_double(d.nash_gap) << ','
        << format_double(d.storage) << ',' << format_double(d.sigma) << ','
        << format_double(d.mass_error) << '\n';
  }
}

void write_refine_csv(std::ostream& out, const RefineReport& report) {
  out << "n_coarse,n_fine,sup_bl,t_of_max\n";
  for (const RefineRow& row : report.rows)
    out << row.n_coarse << ',' << row.n_fine << ',' << format_double(row.sup_bl) << ','
        << format_double(row.t_of_max) << '\n';
}

CdfTable read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  CdfTable table;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
  const auto header = split_cells(line);
  if (header.empty() || header.front() != "t")
    throw ValidationError(path.string() + ": header must start with 't'");
  for (std::size_t c = 1; c < header.size(); ++c) table.grid.push_back(parse_cell(header[c], path, 1));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const auto cells = split_cells(line);
    if (cells.size() != header.size())
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": wrong column count");
    table.times.push_back(parse_cell(cells[0], path, line_no));
    Vector row(static_cast<Index>(cells.size() - 1));
    for (std::size_t c = 1; c < cells.size(); ++c)
      row(static_cast<Index>(c - 1)) = parse_cell(cells[c], path, line_no);
    table.cdfs.push_back(std::move(row));
  }
  return table;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace evodyn::io
