#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgof/samplers.hpp"
#include "kgof/types.hpp"

namespace kgof {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

inline double parse_cell(const std::string& cell, std::size_t line_no) {
  const std::string t = trim(cell);
  if (t.empty())
    throw std::runtime_error("parse error at line " + std::to_string(line_no) + ": empty cell");
  std::size_t pos = 0;
  double value = 0;
  try {
    value = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                             ": non-numeric cell '" + t + "'");
  }
  if (pos != t.size())
    throw std::runtime_error("parse error at line " + std::to_string(line_no) +
                             ": non-numeric cell '" + t + "'");
  return value;
}

}  // namespace detail

/// Reads an n x d sample matrix from CSV: one sample per row, comma-separated,
/// optional single header row (skipped when has_header is set). Lines starting
/// with '#' are treated as comments. Row order is preserved; it matters for
/// correlated data. Ragged or non-numeric rows raise errors naming the line.
inline Matd read_samples_csv(const std::string& path, bool has_header = false) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(t);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(detail::parse_cell(cell, line_no));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("parse error at line " + std::to_string(line_no) + ": expected " +
                               std::to_string(rows.front().size()) + " columns, found " +
                               std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("parse error: no data rows in " + path);
  Matd out(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j)
      out(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  if (!out.allFinite()) throw std::runtime_error("parse error: non-finite values in " + path);
  return out;
}

/// Reads samples from a JSON array of arrays (or a flat array of numbers,
/// interpreted as n x 1).
inline Matd read_samples_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("parse error in " + path + ": " + e.what());
  }
  if (!j.is_array() || j.empty())
    throw std::runtime_error("parse error in " + path + ": expected a nonempty array");
  if (j.front().is_number()) {
    Matd out(static_cast<Index>(j.size()), 1);
    Index i = 0;
    for (const auto& v : j) {
      if (!v.is_number())
        throw std::runtime_error("parse error in " + path + ": mixed array contents");
      out(i++, 0) = v.get<double>();
    }
    return out;
  }
  const auto cols = j.front().size();
  if (cols == 0) throw std::runtime_error("parse error in " + path + ": empty first row");
  Matd out(static_cast<Index>(j.size()), static_cast<Index>(cols));
  Index i = 0;
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols)
      throw std::runtime_error("parse error in " + path + ": ragged row " + std::to_string(i));
    Index k = 0;
    for (const auto& v : row) {
      if (!v.is_number())
        throw std::runtime_error("parse error in " + path + ": non-numeric cell in row " +
                                 std::to_string(i));
      out(i, k++) = v.get<double>();
    }
    ++i;
  }
  if (!out.allFinite()) throw std::runtime_error("parse error: non-finite values in " + path);
  return out;
}

inline Matd read_samples(const std::string& path, const std::string& format,
                         bool has_header = false) {
  if (format == "csv") return read_samples_csv(path, has_header);
  if (format == "json") return read_samples_json(path);
  throw std::invalid_argument("unknown input format: " + format + " (expected csv or json)");
}

/// Writes a chain to CSV: '#'-prefixed metadata lines, then one state per row.
template <typename S>
void write_chain_csv(const Chain<S>& chain, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out.precision(17);
  out << "# states: " << chain.states.rows() << " x " << chain.states.cols() << "\n";
  out << "# acceptance_rate: " << chain.acceptance_rate << "\n";
  out << "# likelihood_evals: " << chain.likelihood_evals << "\n";
  for (Index i = 0; i < chain.states.rows(); ++i) {
    for (Index j = 0; j < chain.states.cols(); ++j) {
      if (j) out << ",";
      out << chain.states(i, j);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

/// Writes a dense matrix as plain CSV (used for Stein matrix dumps).
template <typename S>
void write_matrix_csv(const MatCRef<S>& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out.precision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << m(i, j);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace kgof
