#include "ppcate/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "ppcate/errors.hpp"

namespace ppcate {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // strip surrounding whitespace and trailing CR
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string()
                                         : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_cell(const std::string& cell, int row, const std::string& col) {
  if (cell.empty())
    throw ValidationError("row " + std::to_string(row) +
                          ": missing value in column '" + col + "'");
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw ValidationError("row " + std::to_string(row) +
                          ": non-numeric value '" + cell + "' in column '" +
                          col + "'");
  if (!std::isfinite(v))
    throw ValidationError("row " + std::to_string(row) +
                          ": non-finite value in column '" + col + "'");
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError("'" + path + "' is empty; a header row is required");
  t.header = split_line(line);
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto cells = split_line(line);
    if (cells.size() != t.header.size())
      throw ValidationError("row " + std::to_string(row) + ": expected " +
                            std::to_string(t.header.size()) + " cells, got " +
                            std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

int find_col(const CsvTable& t, const std::string& name) {
  for (std::size_t j = 0; j < t.header.size(); ++j)
    if (t.header[j] == name) return static_cast<int>(j);
  return -1;
}

// Resolve covariate columns: explicit list, or the x1..xd pattern.
std::vector<int> resolve_x_cols(const CsvTable& t, const ColumnMap& cols,
                                std::vector<std::string>* names_out) {
  std::vector<int> idx;
  if (!cols.x_cols.empty()) {
    for (const auto& name : cols.x_cols) {
      const int j = find_col(t, name);
      if (j < 0)
        throw ValidationError("covariate column '" + name + "' not found");
      idx.push_back(j);
      if (names_out) names_out->push_back(name);
    }
    return idx;
  }
  std::unordered_map<int, int> by_number;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    const auto& h = t.header[j];
    if (h.size() < 2 || h[0] != 'x') continue;
    if (!std::all_of(h.begin() + 1, h.end(),
                     [](char c) { return c >= '0' && c <= '9'; }))
      continue;
    if (h[1] == '0') continue;  // x0 / x01 are not part of the schema
    by_number[std::stoi(h.substr(1))] = static_cast<int>(j);
  }
  if (by_number.empty())
    throw ValidationError("no covariate columns found (expected x1..xd)");
  const int d = static_cast<int>(by_number.size());
  for (int k = 1; k <= d; ++k) {
    auto it = by_number.find(k);
    if (it == by_number.end())
      throw ValidationError("covariate columns are not contiguous: missing x" +
                            std::to_string(k));
    idx.push_back(it->second);
    if (names_out) names_out->push_back("x" + std::to_string(k));
  }
  return idx;
}

}  // namespace

Dataset read_dataset_csv(const std::string& path, const ColumnMap& cols) {
  const CsvTable t = read_table(path);
  const int y_col = find_col(t, cols.y);
  if (y_col < 0)
    throw ValidationError("required column '" + cols.y + "' not found");
  const int z_col = find_col(t, cols.z);
  if (z_col < 0)
    throw ValidationError("required column '" + cols.z + "' not found");
  const int tau_col = find_col(t, cols.tau);

  const std::vector<int> x_idx = resolve_x_cols(t, cols, nullptr);

  if (!cols.ignore_extra) {
    for (std::size_t j = 0; j < t.header.size(); ++j) {
      const int ji = static_cast<int>(j);
      if (ji == y_col || ji == z_col || ji == tau_col) continue;
      if (std::find(x_idx.begin(), x_idx.end(), ji) != x_idx.end()) continue;
      throw ValidationError("unrecognized column '" + t.header[j] +
                            "' (use --x-cols or --ignore-extra)");
    }
  }

  const int n = static_cast<int>(t.rows.size());
  const int d = static_cast<int>(x_idx.size());
  Dataset ds;
  ds.X.resize(n, d);
  ds.z.resize(n);
  ds.y.resize(n);
  if (tau_col >= 0) ds.tau_true = Eigen::VectorXd(n);

  for (int i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    const int file_row = i + 2;  // 1-based, after the header
    ds.y[i] = parse_cell(row[static_cast<std::size_t>(y_col)], file_row, cols.y);
    const double zv =
        parse_cell(row[static_cast<std::size_t>(z_col)], file_row, cols.z);
    if (zv != 0.0 && zv != 1.0)
      throw ValidationError("row " + std::to_string(file_row) +
                            ": treatment value must be 0 or 1");
    ds.z[i] = static_cast<int>(zv);
    for (int j = 0; j < d; ++j)
      ds.X(i, j) =
          parse_cell(row[static_cast<std::size_t>(x_idx[static_cast<std::size_t>(j)])],
                     file_row, t.header[static_cast<std::size_t>(x_idx[static_cast<std::size_t>(j)])]);
    if (tau_col >= 0)
      (*ds.tau_true)[i] =
          parse_cell(row[static_cast<std::size_t>(tau_col)], file_row, cols.tau);
  }
  return ds;
}

Eigen::MatrixXd read_covariates_csv(const std::string& path,
                                    const ColumnMap& cols) {
  const CsvTable t = read_table(path);
  ColumnMap relaxed = cols;
  relaxed.ignore_extra = true;
  const std::vector<int> x_idx = resolve_x_cols(t, relaxed, nullptr);
  const int n = static_cast<int>(t.rows.size());
  const int d = static_cast<int>(x_idx.size());
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j)
      X(i, j) =
          parse_cell(row[static_cast<std::size_t>(x_idx[static_cast<std::size_t>(j)])],
                     i + 2, t.header[static_cast<std::size_t>(x_idx[static_cast<std::size_t>(j)])]);
  }
  return X;
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_dataset_csv(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << "y,z";
  for (int j = 1; j <= ds.d(); ++j) out << ",x" << j;
  if (ds.tau_true) out << ",tau_true";
  out << "\n";
  for (int i = 0; i < ds.n(); ++i) {
    out << format_double(ds.y[i]) << ',' << ds.z[i];
    for (int j = 0; j < ds.d(); ++j) out << ',' << format_double(ds.X(i, j));
    if (ds.tau_true) out << ',' << format_double((*ds.tau_true)[i]);
    out << "\n";
  }
}

}  // namespace ppcate
