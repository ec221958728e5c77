#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace rwavg {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kSchemaTag = "rwavg.result/1";

// {"schema", "kind", "config", "result"}: every JSON document written by the tools.
nlohmann::json envelope(const std::string& kind, const nlohmann::json& config, const nlohmann::json& result);

// CSV with two comment lines ("# schema=...", "# config=<compact json>") before the header.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};
void write_csv(std::ostream& os, const std::string& kind, const nlohmann::json& config, const CsvTable& table);
// Parses what write_csv produces; returns the config from the header and fills the table.
nlohmann::json read_csv(std::istream& is, CsvTable& table);

// Reads a JSON object from a file; IoError with the path on failure.
nlohmann::json load_json_file(const std::string& path);
// Accepts inline JSON or a path to a JSON file.
nlohmann::json json_arg(const std::string& text);
// Applies "key=value" overrides; values parse as JSON when possible, else as strings.
void apply_overrides(nlohmann::json& config, const std::vector<std::string>& sets);

// Writes to `path`, or to stdout when it is empty or "-".
void write_text(const std::string& path, const std::string& text);

}  // namespace rwavg
