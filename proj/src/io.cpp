#include "clda/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "clda/errors.hpp"

namespace clda::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw InputError(source + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(t.header.size()) + " fields, found " +
                       std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(lineno);
  }
  if (!have_header) throw InputError(source + ": empty file");
  return t;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_text(path), path); }

double parse_number(const std::string& cell, const std::string& source, std::size_t line,
                    const std::string& column) {
  const std::string where = source + ":" + std::to_string(line) + ": column '" + column + "'";
  if (cell.empty()) throw InputError(where + " is missing a value");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE) {
    throw InputError(where + ": '" + cell + "' is not a number");
  }
  if (!std::isfinite(v)) throw InputError(where + ": non-finite value '" + cell + "'");
  return v;
}

Dataset read_dataset(const std::string& path, bool validate, bool require_label) {
  const CsvTable t = read_csv(path);
  std::ptrdiff_t label_col = -1;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j] == "y") {
      if (label_col >= 0) throw InputError(path + ": duplicate label column 'y'");
      label_col = static_cast<std::ptrdiff_t>(j);
    }
  }
  if (label_col < 0 && require_label) throw InputError(path + ": no label column 'y' in header");
  if (t.rows.empty()) throw InputError(path + ": no data rows");

  Dataset d;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (static_cast<std::ptrdiff_t>(j) != label_col) d.names.push_back(t.header[j]);
  }
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  d.x.resize(n, static_cast<Eigen::Index>(d.names.size()));
  d.labels.assign(t.rows.size(), -1);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < t.header.size(); ++j) {
      const double v = parse_number(t.rows[i][j], path, t.line_numbers[i], t.header[j]);
      if (static_cast<std::ptrdiff_t>(j) == label_col) {
        if (v != 0.0 && v != 1.0) {
          throw InputError(path + ":" + std::to_string(t.line_numbers[i]) +
                           ": label must be 0 or 1");
        }
        d.labels[i] = static_cast<int>(v);
      } else {
        if (v < 0.0) {
          throw InputError(path + ":" + std::to_string(t.line_numbers[i]) + ": column '" +
                           t.header[j] + "' has a negative value");
        }
        d.x(static_cast<Eigen::Index>(i), c++) = v;
      }
    }
  }
  if (validate) validate_dataset(d);
  return d;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_dataset(const std::string& path, const Dataset& data) {
  std::string out = "y";
  for (const auto& n : data.names) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < data.n(); ++i) {
    out += std::to_string(data.labels[i]);
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) {
      out += "," + format_number(data.x(static_cast<Eigen::Index>(i), j));
    }
    out += "\n";
  }
  write_text(path, out);
}

void write_matrix(const std::string& path, const std::vector<std::string>& header,
                  const Eigen::MatrixXd& m) {
  std::string out;
  for (std::size_t j = 0; j < header.size(); ++j) out += (j ? "," : "") + header[j];
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += (j ? "," : "") + format_number(m(i, j));
    out += "\n";
  }
  write_text(path, out);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace clda::io
