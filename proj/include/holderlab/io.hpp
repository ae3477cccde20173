#pragma once
// System definitions from JSON, CSV tables, atomic file output.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "holderlab/ifs.hpp"

namespace holderlab {

struct SystemSpec {
  IFSystem system;
  ProbVector p;
  NumericMode mode = NumericMode::Float;
};

/// Parses {"branches":[{"slope":a,"intercept":b},...],"open_set":[lo,hi],
/// "p":[p1,...,ps],"mode":"float"|"rational"}. Numbers may be given as JSON
/// numbers or as strings ("1/4", "0.3"). Unknown keys are rejected.
SystemSpec parse_system(const nlohmann::json& doc);

/// Canonical form used for hashing: exact rationals rendered as strings.
nlohmann::json system_to_json(const SystemSpec& spec);

std::string mode_name(NumericMode mode);
NumericMode parse_mode(const std::string& name);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> headers) : headers_(std::move(headers)) {}
  void add_row(const std::vector<double>& row);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> headers_;
  std::vector<std::vector<double>> rows_;
};

/// Shortest round-trip decimal for a double; "nan" / "inf" for non-finite.
std::string format_number(double v);

/// Writes bytes to path via a temporary sibling file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace holderlab
