#include "csk/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "csk/error.hpp"

namespace csk {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

class CsvReader {
 public:
  explicit CsvReader(const std::filesystem::path& path) : path_(path), in_(path) {
    if (!in_) throw DataError(path.string() + ": cannot open");
  }

  /// Next non-blank line split into cells; false at end of file.
  bool next(std::vector<std::string>& cells) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      cells = split_line(line);
      return true;
    }
    return false;
  }

  std::size_t line() const { return line_no_; }

  DataError error(const std::string& what) const {
    return DataError(path_.string() + ": line " + std::to_string(line_no_) + ": " + what);
  }
  DataError error(std::size_t column, const std::string& name, const std::string& what) const {
    return DataError(path_.string() + ": line " + std::to_string(line_no_) + ", column " +
                     std::to_string(column + 1) + " (" + name + "): " + what);
  }

  double number(const std::string& text, std::size_t column, const std::string& name) const {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc() || ptr != end)
      throw error(column, name, "'" + text + "' is not a number");
    if (!std::isfinite(v)) throw error(column, name, "non-finite value '" + text + "'");
    return v;
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

void expect_feature_header(const CsvReader& reader, const std::vector<std::string>& cells,
                           std::size_t first, const std::string& prefix) {
  for (std::size_t i = first; i < cells.size(); ++i) {
    const std::string want = prefix + std::to_string(i - first + 1);
    if (cells[i] != want) throw reader.error(i, cells[i], "expected header '" + want + "'");
  }
  if (cells.size() <= first) throw reader.error("header has no feature columns");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

TargetDataset load_target_csv(const std::filesystem::path& path) {
  CsvReader reader(path);
  std::vector<std::string> cells;
  if (!reader.next(cells)) throw DataError(path.string() + ": empty file");
  if (cells.size() < 3 || cells[0] != "subject_id" || cells[1] != "label")
    throw reader.error("header must start with 'subject_id,label'");
  expect_feature_header(reader, cells, 2, "f");
  const std::vector<std::string> header = cells;
  const std::size_t n = header.size() - 2;

  struct Subject {
    int label;
    std::size_t first_line;
    std::vector<std::vector<double>> rows;
  };
  std::vector<std::string> order;
  std::map<std::string, Subject> subjects;
  while (reader.next(cells)) {
    if (cells.size() != header.size())
      throw reader.error("expected " + std::to_string(header.size()) + " columns, found " +
                         std::to_string(cells.size()));
    const std::string& id = cells[0];
    if (id.empty()) throw reader.error(0, "subject_id", "empty subject id");
    int label = 0;
    if (cells[1] == "0") label = 0;
    else if (cells[1] == "1") label = 1;
    else throw reader.error(1, "label", "label '" + cells[1] + "' is not 0 or 1");
    std::vector<double> row(n);
    for (std::size_t j = 0; j < n; ++j) row[j] = reader.number(cells[j + 2], j + 2, header[j + 2]);

    auto [it, inserted] = subjects.try_emplace(id, Subject{label, reader.line(), {}});
    if (inserted) order.push_back(id);
    else if (it->second.label != label)
      throw reader.error(1, "label", "subject " + id + " has conflicting labels");
    it->second.rows.push_back(std::move(row));
  }
  if (order.empty()) throw DataError(path.string() + ": no subjects");

  const std::size_t h0 = subjects.at(order.front()).rows.size();
  TargetDataset target;
  for (const auto& id : order) {
    const Subject& s = subjects.at(id);
    if (s.rows.size() != h0)
      throw DataError(path.string() + ": line " + std::to_string(s.first_line) + ", column 1 (subject_id): subject " +
                      id + " has " + std::to_string(s.rows.size()) + " rows, expected H0 = " +
                      std::to_string(h0));
    SubjectBlock block(static_cast<Eigen::Index>(h0), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < h0; ++i)
      for (std::size_t j = 0; j < n; ++j)
        block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s.rows[i][j];
    target.blocks.push_back(std::move(block));
    target.labels.push_back(s.label);
    target.subject_ids.push_back(id);
  }
  return target;
}

void write_target_csv(const std::filesystem::path& path, const TargetDataset& target) {
  target.validate();
  auto out = open_out(path);
  out << "subject_id,label";
  for (Eigen::Index j = 0; j < target.block_shape().cols; ++j) out << ",f" << j + 1;
  out << '\n';
  for (std::size_t s = 0; s < target.size(); ++s) {
    const auto& b = target.blocks[s];
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      out << target.subject_ids[s] << ',' << target.labels[s];
      for (Eigen::Index j = 0; j < b.cols(); ++j) out << ',' << format_double(b(i, j));
      out << '\n';
    }
  }
}

std::vector<std::vector<double>> load_feature_rows(const std::filesystem::path& path) {
  CsvReader reader(path);
  std::vector<std::string> cells;
  if (!reader.next(cells)) throw DataError(path.string() + ": empty file");
  expect_feature_header(reader, cells, 0, "f");
  const std::vector<std::string> header = cells;
  std::vector<std::vector<double>> rows;
  while (reader.next(cells)) {
    if (cells.size() != header.size())
      throw reader.error("expected " + std::to_string(header.size()) + " columns, found " +
                         std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) row[j] = reader.number(cells[j], j, header[j]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_feature_rows(const std::filesystem::path& path,
                        const std::vector<std::vector<double>>& rows) {
  auto out = open_out(path);
  const std::size_t n = rows.empty() ? 0 : rows.front().size();
  for (std::size_t j = 0; j < n; ++j) out << (j ? ",f" : "f") << j + 1;
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) out << (j ? "," : "") << format_double(row[j]);
    out << '\n';
  }
}

SourceDomain load_source_features(const std::filesystem::path& path, Eigen::Index h0) {
  const auto rows = load_feature_rows(path);
  if (rows.empty()) throw DataError(path.string() + ": no feature rows (empty source domain)");
  SourceDomain domain;
  try {
    domain = build_source_domain(rows, h0);
  } catch (const InvalidInput& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (domain.blocks.empty())
    throw DataError(path.string() + ": " + std::to_string(rows.size()) +
                    " rows do not fill one block of H0 = " + std::to_string(h0));
  return domain;
}

void write_source_features(const std::filesystem::path& path, const SourceDomain& source) {
  std::vector<std::vector<double>> rows;
  for (const auto& b : source.blocks)
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
      const Eigen::RowVectorXd r = b.row(i);
      rows.emplace_back(r.data(), r.data() + r.size());
    }
  write_feature_rows(path, rows);
}

void write_feature_table_csv(const std::filesystem::path& path, const FeatureTable& table) {
  auto out = open_out(path);
  out << "subject_id,label";
  for (Eigen::Index j = 0; j < table.rows.cols(); ++j) out << ",g" << j + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < table.rows.rows(); ++i) {
    out << table.subject_ids[static_cast<std::size_t>(i)] << ','
        << table.labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < table.rows.cols(); ++j) out << ',' << format_double(table.rows(i, j));
    out << '\n';
  }
}

}  // namespace csk
