#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cdpclust {

/// A rectangular table of item profiles: one row per item, one numeric column
/// per sample, plus optional string annotation columns.
struct DatasetTable {
  std::vector<std::string> ids;
  std::vector<std::string> sample_names;
  Eigen::MatrixXd data;
  std::vector<std::pair<std::string, std::vector<std::string>>> annotations;
  std::vector<std::string> warnings;

  int size() const { return static_cast<int>(ids.size()); }
  int samples() const { return static_cast<int>(data.cols()); }
  const std::vector<std::string>& annotation(const std::string& name) const;
};

/// Tab-separated file with a header row; the first column holds item ids,
/// columns named in `annotation_columns` are kept as strings, and every
/// other column must be numeric. Duplicate ids get "_2", "_3", ... appended
/// with a warning. Throws cdp::LoadError naming the line and column of the
/// first bad cell.
DatasetTable load_dataset(const std::filesystem::path& path, const std::vector<std::string>& annotation_columns = {});

/// Comma-separated numeric matrix without a header.
Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path);

}  // namespace cdpclust
