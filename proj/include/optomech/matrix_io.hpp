#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "optomech/error.hpp"
#include "optomech/param_fields.hpp"

namespace optomech {

// Plain-text numeric grid: one row per line, space-separated, row-major,
// shortest round-trip decimal for every entry.
template <typename Derived>
void write_grid(std::ostream& os, const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

template <int N>
Eigen::Matrix<double, N, N> read_grid(std::istream& is) {
  Eigen::Matrix<double, N, N> m;
  std::string line;
  for (int i = 0; i < N; ++i) {
    if (!std::getline(is, line)) throw Error(ErrorKind::IoError, "matrix grid has too few rows");
    std::istringstream row(line);
    std::string token;
    for (int j = 0; j < N; ++j) {
      if (!(row >> token)) throw Error(ErrorKind::IoError, "matrix grid row is too short");
      const auto [value, unit] = parse_quantity(token);
      if (!unit.empty()) throw Error(ErrorKind::IoError, "bad matrix entry '" + token + "'");
      m(i, j) = value;
    }
    if (row >> token) throw Error(ErrorKind::IoError, "matrix grid row is too long");
  }
  return m;
}

}  // namespace optomech
