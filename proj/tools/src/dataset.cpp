#include "cdpclust/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "cdp/error.hpp"

namespace cdpclust {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

std::string where(const std::filesystem::path& path, int line, const std::string& column) {
  std::ostringstream os;
  os << path.string() << ": line " << line << ", column '" << column << "'";
  return os.str();
}

}  // namespace

const std::vector<std::string>& DatasetTable::annotation(const std::string& name) const {
  for (const auto& [n, values] : annotations) {
    if (n == name) return values;
  }
  throw cdp::InvalidInput("no annotation column named '" + name + "'");
}

DatasetTable load_dataset(const std::filesystem::path& path, const std::vector<std::string>& annotation_columns) {
  std::ifstream in(path);
  if (!in) throw cdp::LoadError("cannot open data file " + path.string());

  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw cdp::LoadError(path.string() + ": file is empty");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split(line, '\t');
  if (header.size() < 2) throw cdp::LoadError(path.string() + ": header needs an id column and at least one sample");

  DatasetTable t;
  std::vector<int> numeric_cols;
  std::vector<int> annot_cols;
  for (const auto& name : annotation_columns) {
    const auto it = std::find(header.begin() + 1, header.end(), name);
    if (it == header.end()) throw cdp::LoadError(path.string() + ": annotation column '" + name + "' not in header");
    annot_cols.push_back(static_cast<int>(it - header.begin()));
    t.annotations.emplace_back(name, std::vector<std::string>{});
  }
  for (int c = 1; c < static_cast<int>(header.size()); ++c) {
    if (std::find(annot_cols.begin(), annot_cols.end(), c) == annot_cols.end()) {
      numeric_cols.push_back(c);
      t.sample_names.push_back(trim(header[static_cast<std::size_t>(c)]));
    }
  }
  if (numeric_cols.empty()) throw cdp::LoadError(path.string() + ": no numeric sample columns");

  std::vector<std::vector<double>> rows;
  std::map<std::string, int> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split(line, '\t');
    if (fields.size() != header.size()) {
      std::ostringstream os;
      os << path.string() << ": line " << line_no << " (data row " << rows.size() + 1 << ") has " << fields.size()
         << " fields, expected " << header.size();
      throw cdp::LoadError(os.str());
    }
    std::string id = trim(fields[0]);
    if (id.empty()) throw cdp::LoadError(where(path, line_no, header[0]) + ": empty id");
    if (const int count = ++seen[id]; count > 1) {
      std::string renamed = id + "_" + std::to_string(count);
      while (seen.count(renamed)) renamed += "_";
      seen[renamed] = 1;
      t.warnings.push_back("duplicate id '" + id + "' on line " + std::to_string(line_no) + " renamed to '" + renamed +
                           "'");
      id = renamed;
    }
    t.ids.push_back(id);
    std::vector<double> values;
    for (int c : numeric_cols) {
      double v;
      if (!parse_double(fields[static_cast<std::size_t>(c)], v)) {
        throw cdp::LoadError(where(path, line_no, header[static_cast<std::size_t>(c)]) + ": '" +
                             fields[static_cast<std::size_t>(c)] + "' is not a finite number");
      }
      values.push_back(v);
    }
    for (std::size_t a = 0; a < annot_cols.size(); ++a) {
      t.annotations[a].second.push_back(trim(fields[static_cast<std::size_t>(annot_cols[a])]));
    }
    rows.push_back(std::move(values));
  }
  if (rows.size() < 2) throw cdp::LoadError(path.string() + ": need at least two data rows");

  t.data.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(numeric_cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t s = 0; s < rows[i].size(); ++s) {
      t.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) = rows[i][s];
    }
  }
  return t;
}

Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw cdp::LoadError("cannot open matrix file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<double> row;
    const auto fields = split(line, ',');
    for (std::size_t c = 0; c < fields.size(); ++c) {
      double v;
      if (!parse_double(fields[c], v)) {
        throw cdp::LoadError(path.string() + ": line " + std::to_string(line_no) + ", column " + std::to_string(c + 1) +
                             ": '" + fields[c] + "' is not a finite number");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw cdp::LoadError(path.string() + ": line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                           " columns, expected " + std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw cdp::LoadError(path.string() + ": matrix file is empty");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

}  // namespace cdpclust
