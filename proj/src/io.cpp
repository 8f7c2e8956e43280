#include "sar/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace sar {

namespace {

std::vector<std::string> split_line(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  return f;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

}  // namespace

Eigen::MatrixXd read_csv_matrix(const std::string& path) {
  auto f = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split_line(line, ','))
      row.push_back(std::stod(trim(cell)));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("ragged CSV matrix: " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("empty CSV matrix: " + path);
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return m;
}

void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  auto f = open_out(path);
  f << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      f << (j ? "," : "") << m(i, j);
    f << "\n";
  }
}

Eigen::MatrixXd read_matrix_market(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error("empty Matrix Market file: " + path);
  std::stringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix" ||
      format != "coordinate")
    throw std::runtime_error("unsupported Matrix Market header: " + path);
  bool pattern = (field == "pattern");
  bool symmetric = (symmetry == "symmetric");
  if (!pattern && field != "real")
    throw std::runtime_error("unsupported Matrix Market field: " + field);
  while (std::getline(f, line) && (line.empty() || line[0] == '%')) {
  }
  std::stringstream sizes(line);
  Eigen::Index rows, cols;
  long long nnz;
  sizes >> rows >> cols >> nnz;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  for (long long e = 0; e < nnz; ++e) {
    if (!std::getline(f, line))
      throw std::runtime_error("truncated Matrix Market file: " + path);
    std::stringstream entry(line);
    Eigen::Index i, j;
    double v = 1.0;
    entry >> i >> j;
    if (!pattern) entry >> v;
    m(i - 1, j - 1) = v;
    if (symmetric && i != j) m(j - 1, i - 1) = v;
  }
  return m;
}

void write_matrix_market(const std::string& path, const Eigen::MatrixXd& m) {
  auto f = open_out(path);
  long long nnz = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0) ++nnz;
  f << "%%MatrixMarket matrix coordinate real general\n";
  f << m.rows() << " " << m.cols() << " " << nnz << "\n";
  f << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0)
        f << (i + 1) << " " << (j + 1) << " " << m(i, j) << "\n";
}

Eigen::MatrixXd read_matrix_auto(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".mtx") return read_matrix_market(path);
  return read_csv_matrix(path);
}

Table read_csv_table(const std::string& path) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line))
    throw std::runtime_error("empty CSV table: " + path);
  Table t;
  for (const auto& cell : split_line(trim(line), ','))
    t.columns.push_back(trim(cell));
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split_line(line, ','))
      row.push_back(std::stod(trim(cell)));
    if (row.size() != t.columns.size())
      throw std::runtime_error("ragged CSV table: " + path);
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(t.columns.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
  return t;
}

void write_csv_table(const std::string& path, const Table& t) {
  auto f = open_out(path);
  for (std::size_t j = 0; j < t.columns.size(); ++j)
    f << (j ? "," : "") << t.columns[j];
  f << "\n";
  f << std::setprecision(17);
  for (Eigen::Index i = 0; i < t.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.values.cols(); ++j)
      f << (j ? "," : "") << t.values(i, j);
    f << "\n";
  }
}

}  // namespace sar
