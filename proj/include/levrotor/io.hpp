#pragma once

#include <openssl/evp.h>
#include <unistd.h>

#include <array>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "levrotor/dynamics.hpp"
#include "levrotor/error.hpp"

namespace levrotor {

#ifndef LEVROTOR_VERSION
#define LEVROTOR_VERSION "0.0.0"
#endif

inline constexpr std::string_view kVersion = LEVROTOR_VERSION;

using Json = nlohmann::ordered_json;

/// Shortest decimal text that reads back to the same double.
inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), res.ptr};
}

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

/// Provenance written at the top of every output file.
struct OutputMeta {
  std::string command;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> extra;  // CSV only
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) {
    if (row.size() != header.size()) throw IoError("csv: row width does not match header");
    rows.push_back(std::move(row));
  }
};

inline std::string render_csv(const CsvTable& table, const OutputMeta& meta) {
  std::string out;
  out += "# levrotor " + std::string(kVersion) + "\n";
  out += "# command: " + meta.command + "\n";
  out += "# config_sha256: " + meta.config_digest + "\n";
  out += "# seed: " + std::to_string(meta.seed) + "\n";
  for (const auto& [k, v] : meta.extra) out += "# " + k + ": " + v + "\n";
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return out;
}

/// JSON has no comments; provenance goes in a leading "meta" object.
inline std::string render_json(const Json& body, const OutputMeta& meta) {
  Json doc;
  doc["meta"] = {{"toolkit", "levrotor"},
                 {"version", std::string(kVersion)},
                 {"command", meta.command},
                 {"config_sha256", meta.config_digest},
                 {"seed", meta.seed}};
  for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = it.value();
  return doc.dump(2) + "\n";
}

/// Writes to a sibling temporary file and renames it over the target.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  const std::filesystem::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ignore;
      std::filesystem::remove(tmp, ignore);
      throw IoError("write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignore;
    std::filesystem::remove(tmp, ignore);
    throw IoError("cannot rename onto '" + path.string() + "': " + ec.message());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Comment-stripped CSV: `# key: value` lines become metadata entries.
struct CsvDocument {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // source line of each row

  [[nodiscard]] std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw IoError("csv: missing column '" + std::string(name) + "'");
  }
};

inline CsvDocument parse_csv(const std::string& text, const std::string& source = "csv") {
  CsvDocument doc;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        auto trim = [](std::string s) {
          const auto a = s.find_first_not_of(" \t");
          const auto b = s.find_last_not_of(" \t");
          return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        doc.meta[trim(line.substr(1, colon - 1))] = trim(line.substr(colon + 1));
      }
      continue;
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (doc.header.empty()) {
      doc.header = std::move(cells);
    } else {
      if (cells.size() != doc.header.size()) {
        throw IoError(source + ": line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                      " fields, header has " + std::to_string(doc.header.size()));
      }
      doc.rows.push_back(std::move(cells));
      doc.lines.push_back(lineno);
    }
  }
  if (doc.header.empty()) throw IoError(source + ": no header line");
  return doc;
}

inline double parse_number(const std::string& cell, const std::string& where) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first < last && *first == ' ') ++first;
  if (first < last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw IoError(where + ": '" + cell + "' is not a number");
  return v;
}

inline void require_header(const CsvDocument& doc, const std::vector<std::string>& expected,
                           const std::string& source) {
  if (doc.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw IoError(source + ": expected header '" + want + "'");
  }
}

inline CsvTable trace_table(const SpinDownTrace& trace) {
  CsvTable t{{"t_s", "x_m", "y_m"}, {}};
  for (const auto& s : trace.samples) t.add({format_number(s.t), format_number(s.x), format_number(s.y)});
  return t;
}

/// Reads a `t_s,x_m,y_m` trace. Optional `# marker_radius_m:` and
/// `# direction:` comment lines are honoured.
inline SpinDownTrace read_trace_csv(const std::filesystem::path& path) {
  const std::string source = path.string();
  const CsvDocument doc = parse_csv(read_file(path), source);
  require_header(doc, {"t_s", "x_m", "y_m"}, source);
  SpinDownTrace trace;
  for (std::size_t i = 0; i < doc.rows.size(); ++i) {
    const std::string where = source + ": line " + std::to_string(doc.lines[i]);
    trace.samples.push_back({parse_number(doc.rows[i][0], where), parse_number(doc.rows[i][1], where),
                             parse_number(doc.rows[i][2], where)});
  }
  if (auto it = doc.meta.find("marker_radius_m"); it != doc.meta.end()) {
    trace.marker_radius = parse_number(it->second, source + ": marker_radius_m");
  }
  if (auto it = doc.meta.find("direction"); it != doc.meta.end()) {
    trace.direction = static_cast<int>(parse_number(it->second, source + ": direction"));
  }
  return trace;
}

inline std::vector<TiltSample> read_tilt_csv(const std::filesystem::path& path) {
  const std::string source = path.string();
  const CsvDocument doc = parse_csv(read_file(path), source);
  require_header(doc, {"theta_x_deg", "theta_y_deg", "gamma_Hz"}, source);
  std::vector<TiltSample> out;
  for (std::size_t i = 0; i < doc.rows.size(); ++i) {
    const std::string where = source + ": line " + std::to_string(doc.lines[i]);
    out.push_back({parse_number(doc.rows[i][0], where), parse_number(doc.rows[i][1], where),
                   parse_number(doc.rows[i][2], where)});
  }
  return out;
}

}  // namespace levrotor
