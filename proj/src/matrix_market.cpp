#include "wgmres/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "wgmres/curves.hpp"

namespace wgmres::lab {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void fail(long line, const std::string& msg) {
  throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + msg);
}

}  // namespace

Mat read_matrix_market(std::istream& in) {
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) fail(1, "empty input");
  ++lineno;
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") fail(lineno, "missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") fail(lineno, "object must be 'matrix'");
  if (format != "coordinate" && format != "array") fail(lineno, "unknown format '" + format + "'");
  if (field == "pattern") throw Error(ErrorKind::UnsupportedField, "pattern matrices carry no values");
  if (field != "real" && field != "integer" && field != "complex" && field != "double")
    fail(lineno, "unknown field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric" && symmetry != "hermitian" && symmetry != "skew-symmetric")
    fail(lineno, "unknown symmetry '" + symmetry + "'");
  const bool is_complex = field == "complex";

  // Size line, skipping comments and blank lines.
  while (std::getline(in, line)) {
    ++lineno;
    auto p = line.find_first_not_of(" \t\r");
    if (p == std::string::npos || line[p] == '%') continue;
    break;
  }
  if (!in && line.empty()) fail(lineno, "missing size line");
  std::istringstream ss(line);
  long rows = 0, cols = 0, nnz = 0;
  if (!(ss >> rows >> cols)) fail(lineno, "malformed size line");
  if (format == "coordinate" && !(ss >> nnz)) fail(lineno, "coordinate size line needs an entry count");
  if (rows <= 0 || cols <= 0 || nnz < 0) fail(lineno, "invalid dimensions");
  if (symmetry != "general" && rows != cols) fail(lineno, "symmetric storage needs a square matrix");

  Mat a = Mat::Zero(rows, cols);
  auto place = [&](long i, long j, cplx v) {
    a(i, j) += v;
    if (i == j) return;
    if (symmetry == "symmetric") a(j, i) += v;
    else if (symmetry == "hermitian") a(j, i) += std::conj(v);
    else if (symmetry == "skew-symmetric") a(j, i) -= v;
  };

  auto next_data = [&](std::istringstream& ds) {
    while (std::getline(in, line)) {
      ++lineno;
      auto p = line.find_first_not_of(" \t\r");
      if (p == std::string::npos || line[p] == '%') continue;
      ds.clear();
      ds.str(line);
      return true;
    }
    return false;
  };

  std::istringstream ds;
  if (format == "coordinate") {
    for (long e = 0; e < nnz; ++e) {
      if (!next_data(ds)) fail(lineno, "expected " + std::to_string(nnz) + " entries, got " + std::to_string(e));
      long i = 0, j = 0;
      double re = 0, im = 0;
      if (!(ds >> i >> j >> re)) fail(lineno, "malformed entry");
      if (is_complex && !(ds >> im)) fail(lineno, "complex entry needs two values");
      if (i < 1 || i > rows || j < 1 || j > cols) fail(lineno, "index out of range");
      if (symmetry != "general" && i < j) fail(lineno, "entry above the diagonal in symmetric storage");
      place(i - 1, j - 1, cplx(re, im));
    }
  } else {
    for (long j = 0; j < cols; ++j) {
      const long start = symmetry == "general" ? 0 : (symmetry == "skew-symmetric" ? j + 1 : j);
      for (long i = start; i < rows; ++i) {
        if (!next_data(ds)) fail(lineno, "too few array entries");
        double re = 0, im = 0;
        if (!(ds >> re)) fail(lineno, "malformed value");
        if (is_complex && !(ds >> im)) fail(lineno, "complex entry needs two values");
        place(i, j, cplx(re, im));
      }
    }
  }
  if (!a.allFinite()) throw Error(ErrorKind::NonFinite, "matrix has non-finite entries");
  return a;
}

Mat read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  return read_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const Mat& a) {
  const bool is_complex = a.size() > 0 && a.imag().cwiseAbs().maxCoeff() > 0.0;
  out << "%%MatrixMarket matrix array " << (is_complex ? "complex" : "real") << " general\n";
  out << a.rows() << ' ' << a.cols() << '\n';
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out << curves::format_double(a(i, j).real());
      if (is_complex) out << ' ' << curves::format_double(a(i, j).imag());
      out << '\n';
    }
}

void write_matrix_market(const std::string& path, const Mat& a) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  write_matrix_market(out, a);
}

}  // namespace wgmres::lab
