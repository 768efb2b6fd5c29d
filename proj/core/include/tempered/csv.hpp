#pragma once

#include <string>
#include <vector>

#include "tempered/errors.hpp"
#include "tempered/linmodel.hpp"

namespace tempered {

/// RFC-4180 table: mandatory header row, CRLF line endings on output,
/// quoted fields when they contain separators.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // throws SchemaMismatch
  std::string to_string() const;
};

CsvTable parse_csv(const std::string& text);
CsvTable read_csv_file(const std::string& path);
void write_csv_file(const std::string& path, const CsvTable& table);

std::string format_double(double v);
double parse_double(const std::string& s);  // accepts "inf"

/// Loads a regression dataset: `response` names the y column, every other
/// column is a covariate (in header order). With log_response, y is replaced
/// by log(y).
Dataset load_dataset_csv(const std::string& path, const std::string& response,
                         bool log_response = false);

/// Covariate names in the order load_dataset_csv produced them.
std::vector<std::string> dataset_covariate_names(const std::string& path,
                                                 const std::string& response);

}  // namespace tempered
