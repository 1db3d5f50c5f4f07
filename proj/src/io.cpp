#include "slabte/io.hpp"

#include <gsl/gsl_version.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

#ifndef SLABTE_VERSION
#define SLABTE_VERSION "0.0.0"
#endif

namespace slabte {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  std::array<char, 64> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), r.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add(const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) body_ += ',';
    body_ += format_number(row[i]);
  }
  body_ += '\n';
  ++rows_;
}

void CsvTable::add(const std::string& label, const std::vector<double>& row) {
  body_ += label;
  for (double v : row) {
    body_ += ',';
    body_ += format_number(v);
  }
  body_ += '\n';
  ++rows_;
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out += ',';
    out += header_[i];
  }
  out += '\n';
  return out + body_;
}

nlohmann::json versions() {
  nlohmann::json v;
  v["slabte"] = SLABTE_VERSION;
  v["compiler"] = __VERSION__;
  v["gsl"] = GSL_VERSION;
  v["nlohmann_json"] = std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                       "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  v["cxx_standard"] = __cplusplus;
  return v;
}

nlohmann::json base_meta(const Scenario& s, const std::string& command, std::uint64_t seed) {
  nlohmann::json m;
  m["command"] = command;
  m["scenario"] = s.name;
  m["config_hash"] = "fnv1a64:" + hex64(s.hash);
  m["seed"] = seed;
  m["versions"] = versions();
  return m;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("cannot write " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_file(path, j.dump(2) + "\n"); }

void write_csv(const std::filesystem::path& dir, const std::string& name, const CsvTable& table,
               nlohmann::json meta) {
  write_file(dir / (name + ".csv"), table.str());
  meta["file"] = name + ".csv";
  meta["columns"] = table.header();
  meta["rows"] = table.rows();
  write_json(dir / (name + ".meta.json"), meta);
}

}  // namespace slabte
