#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "slabte/config.hpp"

namespace slabte {

/// Shortest round-trip decimal form, independent of the C locale.
std::string format_number(double v);

/// Comma-separated table with a header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add(const std::vector<double>& row);
  /// Row with a leading text cell; the remaining cells are numbers.
  void add(const std::string& label, const std::vector<double>& row);
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_; }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::string body_;
  std::size_t rows_ = 0;
};

nlohmann::json versions();

/// Meta block shared by every sidecar: command, config hash, seed and versions.
nlohmann::json base_meta(const Scenario& s, const std::string& command, std::uint64_t seed);

/// Writes bytes atomically enough for batch use; IoError on failure.
void write_file(const std::filesystem::path& path, const std::string& bytes);

/// name.csv plus name.meta.json with `meta` extended by the header and row count.
void write_csv(const std::filesystem::path& dir, const std::string& name, const CsvTable& table,
               nlohmann::json meta);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace slabte
