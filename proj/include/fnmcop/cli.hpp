#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fnmcop {

enum class HeaderMode { automatic, present, absent };

struct CsvOptions {
  HeaderMode header = HeaderMode::automatic;
  std::size_t min_rows = 10;
};

/// Two selected numeric columns of a CSV file.
struct Dataset {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;  // n x 2
  std::string path;
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::vector<std::size_t> selected;  // 1-based indices into the file columns
  bool magic_layout = false;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::vector<double> column(int j) const;
};

/// selector: "name1,name2" or "i,j" (1-based); empty picks the first two
/// numeric columns. Names match case-insensitively, and a leading "f" may be
/// omitted (the MAGIC file names its features fLength, fM3Long, ...). Throws
/// InputError for unreadable files, unresolvable or non-numeric selections
/// and fewer than min_rows usable rows.
Dataset load_csv(const std::string& path, const std::string& selector = "", const CsvOptions& options = {});

/// 6 significant digits; NA for NaN.
std::string format_csv_number(double x);

/// Full command-line front end. Exit codes: 0 success, 1 input error,
/// 2 convergence warning, 3 numeric failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fnmcop
