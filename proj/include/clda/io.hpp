#pragma once

// CSV datasets. The first row is a header; the label column is named `y`.
// Numbers are written with %.17g so files round-trip exactly.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clda/dataset.hpp"

namespace clda::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

// Throws InputError with the line number for ragged rows; blank lines are skipped.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& source = "<memory>");

// Strict decimal parse; throws InputError naming the source, line and column.
double parse_number(const std::string& cell, const std::string& source, std::size_t line,
                    const std::string& column);

// A `y` column holds 0/1 labels; other columns are covariates. Missing or
// non-numeric cells are rejected. Without `require_label` a file lacking `y`
// is accepted and every label is -1. Runs validate_dataset unless `validate`
// is false (prediction inputs may hold constant columns).
Dataset read_dataset(const std::string& path, bool validate = true, bool require_label = true);

std::string format_number(double v);

void write_dataset(const std::string& path, const Dataset& data);
void write_matrix(const std::string& path, const std::vector<std::string>& header,
                  const Eigen::MatrixXd& m);

// Whole-file helpers; write_text creates parent directories.
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace clda::io
