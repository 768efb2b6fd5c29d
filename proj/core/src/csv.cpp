#include "tempered/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace tempered {

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw SchemaMismatch("csv: missing column '" + name + "'");
}

std::string CsvTable::to_string() const {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
    return out;
  };
  std::ostringstream os;
  for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << field(header[i]);
  os << "\r\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << field(row[i]);
    os << "\r\n";
  }
  return os.str();
}

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"': quoted = true; any = true; break;
      case ',':
        record.push_back(field);
        field.clear();
        any = true;
        break;
      case '\r': break;
      case '\n':
        if (any || !field.empty() || !record.empty()) {
          record.push_back(field);
          records.push_back(record);
        }
        record.clear();
        field.clear();
        any = false;
        break;
      default: field += c; any = true; break;
    }
  }
  if (any || !field.empty() || !record.empty()) {
    record.push_back(field);
    records.push_back(record);
  }
  if (quoted) throw ParseError("csv: unterminated quoted field");
  if (records.empty()) throw ParseError("csv: missing header row");

  CsvTable t;
  t.header = records.front();
  for (size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size())
      throw ParseError("csv: row " + std::to_string(r) + " has wrong field count");
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("csv: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

void write_csv_file(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("csv: cannot write " + path);
  out << table.to_string();
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ParseError("csv: trailing characters in number '" + s + "'");
    return v;
  } catch (const std::invalid_argument&) {
    throw ParseError("csv: not a number: '" + s + "'");
  } catch (const std::out_of_range&) {
    throw ParseError("csv: number out of range: '" + s + "'");
  }
}

Dataset load_dataset_csv(const std::string& path, const std::string& response, bool log_response) {
  const CsvTable t = read_csv_file(path);
  const int yc = t.column(response);
  if (t.rows.empty()) throw ParseError("csv: no data rows in " + path);
  const auto p = static_cast<Eigen::Index>(t.header.size()) - 1;
  if (p < 1) throw ParseError("csv: need at least one covariate column");

  Dataset d;
  d.X.resize(static_cast<Eigen::Index>(t.rows.size()), p);
  d.y.resize(static_cast<Eigen::Index>(t.rows.size()));
  for (size_t r = 0; r < t.rows.size(); ++r) {
    Eigen::Index c = 0;
    for (size_t j = 0; j < t.header.size(); ++j) {
      const double v = parse_double(t.rows[r][j]);
      if (static_cast<int>(j) == yc) {
        if (log_response && !(v > 0.0))
          throw ParseError("csv: log response needs positive values");
        d.y[static_cast<Eigen::Index>(r)] = log_response ? std::log(v) : v;
      } else {
        d.X(static_cast<Eigen::Index>(r), c++) = v;
      }
    }
  }
  d.validate();
  return d;
}

std::vector<std::string> dataset_covariate_names(const std::string& path,
                                                 const std::string& response) {
  const CsvTable t = read_csv_file(path);
  const int yc = t.column(response);
  std::vector<std::string> names;
  for (size_t j = 0; j < t.header.size(); ++j) {
    if (static_cast<int>(j) != yc) names.push_back(t.header[j]);
  }
  return names;
}

}  // namespace tempered
