/* Matrix and data file I/O.
 *
 * Matrices travel as either Matrix Market files (coordinate format, "real" or
 * "pattern" field) or dense CSV. Data files (y and X) are CSV with a header
 * row naming the columns.
 */
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace sar {

// Dense CSV, no header. Values written with full double precision.
Eigen::MatrixXd read_csv_matrix(const std::string& path);
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m);

// Matrix Market coordinate format; symmetric/general, real/pattern.
Eigen::MatrixXd read_matrix_market(const std::string& path);
void write_matrix_market(const std::string& path, const Eigen::MatrixXd& m);

// Reads a matrix, dispatching on extension (.mtx -> Matrix Market, else CSV).
Eigen::MatrixXd read_matrix_auto(const std::string& path);

// CSV with a header row; returns column names and the numeric body.
struct Table {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
};
Table read_csv_table(const std::string& path);
void write_csv_table(const std::string& path, const Table& t);

}  // namespace sar
