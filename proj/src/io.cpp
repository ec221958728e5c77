#include "rwavg/io.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace rwavg {

using nlohmann::json;

json envelope(const std::string& kind, const json& config, const json& result) {
  return json{{"schema", kSchemaTag}, {"kind", kind}, {"config", config}, {"result", result}};
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_csv(std::ostream& os, const std::string& kind, const json& config, const CsvTable& table) {
  os << "# schema=" << kSchemaTag << " kind=" << kind << "\n";
  os << "# config=" << config.dump() << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) os << (i ? "," : "") << csv_field(table.columns[i]);
  os << "\n";
  for (auto& r : table.rows) {
    if (r.size() != table.columns.size()) throw IoError("csv row has " + std::to_string(r.size()) + " fields, expected " +
                                                        std::to_string(table.columns.size()));
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_field(r[i]);
    os << "\n";
  }
}

json read_csv(std::istream& is, CsvTable& table) {
  std::string line;
  if (!std::getline(is, line) || line.rfind(std::string("# schema=") + kSchemaTag, 0) != 0)
    throw IoError("csv: missing schema line");
  if (!std::getline(is, line) || line.rfind("# config=", 0) != 0) throw IoError("csv: missing config line");
  json config = json::parse(line.substr(9));
  if (!std::getline(is, line)) throw IoError("csv: missing header");
  table.columns = split_csv_line(line);
  table.rows.clear();
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    table.rows.push_back(split_csv_line(line));
  }
  return config;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
}

json json_arg(const std::string& text) {
  if (std::filesystem::exists(text)) return load_json_file(text);
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    // a bare word such as "balls" is a JSON string
    return json(text);
  }
}

void apply_overrides(json& config, const std::vector<std::string>& sets) {
  for (auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw IoError("override '" + s + "' is not key=value");
    const std::string key = s.substr(0, eq), val = s.substr(eq + 1);
    try {
      config[key] = json::parse(val);
    } catch (const json::parse_error&) {
      config[key] = val;
    }
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

}  // namespace rwavg
