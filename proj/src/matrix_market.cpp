#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "coarsen/sparsemat.hpp"

namespace coarsen {
namespace {

std::string lower(std::string s) {
  std::ranges::transform(s, s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

[[noreturn]] void parse_error(const std::filesystem::path& path, long line, const std::string& what) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

SymSparse mm_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("mm_read: cannot open " + path.string());

  std::string line;
  long lineno = 1;
  if (!std::getline(in, line)) parse_error(path, lineno, "empty file");
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") parse_error(path, lineno, "missing %%MatrixMarket banner");
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix" || format != "coordinate") {
    parse_error(path, lineno, "expected 'matrix coordinate', got '" + object + " " + format + "'");
  }
  if (field != "real" && field != "integer" && field != "pattern") {
    parse_error(path, lineno, "unsupported field '" + field + "'");
  }
  if (symmetry != "symmetric") {
    parse_error(path, lineno, "expected 'symmetric' qualifier, got '" + symmetry + "'");
  }
  const bool has_values = field != "pattern";

  // size line, skipping comments
  long rows = -1, cols = -1, count = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> count)) parse_error(path, lineno, "malformed size line");
    break;
  }
  if (rows < 0) parse_error(path, lineno, "missing size line");
  if (rows != cols) parse_error(path, lineno, "symmetric matrix must be square");
  if (count < 0) parse_error(path, lineno, "negative entry count");

  std::vector<IndexPair> pairs;
  std::vector<double> vals;
  pairs.reserve(static_cast<std::size_t>(count));
  vals.reserve(static_cast<std::size_t>(count));
  while (static_cast<long>(pairs.size()) < count && std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    long i = 0, j = 0;
    double v = 1.0;
    if (!(ss >> i >> j)) parse_error(path, lineno, "malformed entry");
    if (has_values && !(ss >> v)) parse_error(path, lineno, "missing value");
    if (i < 1 || j < 1 || i > rows || j > rows) {
      parse_error(path, lineno, "index (" + std::to_string(i) + ", " + std::to_string(j) +
                                    ") outside 1.." + std::to_string(rows));
    }
    if (!std::isfinite(v)) parse_error(path, lineno, "non-finite value");
    pairs.emplace_back(std::max(i, j) - 1, std::min(i, j) - 1);
    vals.push_back(v);
  }
  if (static_cast<long>(pairs.size()) != count) {
    parse_error(path, lineno, "expected " + std::to_string(count) + " entries, found " +
                                  std::to_string(pairs.size()));
  }

  SymPattern pattern(rows, pairs);
  TrilIndexMap map(pattern);
  Eigen::VectorXd values = Eigen::VectorXd::Zero(pattern.nnz());
  std::vector<char> seen(static_cast<std::size_t>(pattern.nnz()), 0);
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    Index a = map.index(pairs[e].first, pairs[e].second);
    if (seen[a]) {
      throw std::runtime_error(path.string() + ": duplicate entry (" +
                               std::to_string(pairs[e].first + 1) + ", " +
                               std::to_string(pairs[e].second + 1) + ")");
    }
    seen[a] = 1;
    values[a] = vals[e];
  }
  return SymSparse(std::move(pattern), std::move(values));
}

void mm_write(const std::filesystem::path& path, const SymSparse& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("mm_write: cannot open " + path.string());
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << m.size() << ' ' << m.size() << ' ' << m.pattern.nnz() << '\n';
  Index a = 0;
  for (Index j = 0; j < m.size(); ++j) {
    for (Index i : m.pattern.column(j)) {
      out << (i + 1) << ' ' << (j + 1) << ' ' << format_double(m.values[a++]) << '\n';
    }
  }
  if (!out) throw std::runtime_error("mm_write: failed writing " + path.string());
}

void mm_write_dense(const std::filesystem::path& path, const Eigen::Ref<const Eigen::MatrixXd>& A) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("mm_write_dense: cannot open " + path.string());
  out << "%%MatrixMarket matrix array real general\n";
  out << A.rows() << ' ' << A.cols() << '\n';
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i < A.rows(); ++i) out << format_double(A(i, j)) << '\n';
  if (!out) throw std::runtime_error("mm_write_dense: failed writing " + path.string());
}

}  // namespace coarsen
