#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "csk/signal.hpp"
#include "csk/transfer.hpp"

namespace csk {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Target CSV: header `subject_id,label,f1..fN`; exactly H0 rows per subject
/// (H0 taken from the first subject); labels 0/1, constant within a subject.
/// Subjects keep their order of first appearance. Throws DataError naming the
/// file, line and column.
TargetDataset load_target_csv(const std::filesystem::path& path);
void write_target_csv(const std::filesystem::path& path, const TargetDataset& target);

/// Feature-row CSV: header `f1..fN`, one sample per line.
std::vector<std::vector<double>> load_feature_rows(const std::filesystem::path& path);
void write_feature_rows(const std::filesystem::path& path,
                        const std::vector<std::vector<double>>& rows);

/// Feature rows grouped into h0-row blocks. An input that yields no block is an error.
SourceDomain load_source_features(const std::filesystem::path& path, Eigen::Index h0);
void write_source_features(const std::filesystem::path& path, const SourceDomain& source);

/// `subject_id,label,g1..gN0`.
void write_feature_table_csv(const std::filesystem::path& path, const FeatureTable& table);

}  // namespace csk
