#pragma once

// Column-labelled numeric tables written as CSV with a commented metadata
// header, plus an optional JSON mirror.  The content hash is the git blob
// SHA-1 of the CSV body (column line and rows), so identical data gives an
// identical hash regardless of metadata.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <openssl/evp.h>

#include "json.hpp"
#include "skcat/core/types.hpp"

namespace skcat {

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string git_blob_sha1(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1)
    throw Error("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

struct Dataset {
  std::string name;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::string> units;
  std::vector<std::vector<double>> rows;

  void add_meta(const std::string& key, const std::string& value) { meta.emplace_back(key, value); }
  void add_meta(const std::string& key, double value) { meta.emplace_back(key, format_number(value)); }

  void add_column(const std::string& column, const std::string& unit = "1") {
    columns.push_back(column);
    units.push_back(unit);
  }

  void add_row(std::vector<double> row) {
    if (row.size() != columns.size())
      throw Error("dataset " + name + ": row has " + std::to_string(row.size()) + " entries, expected " +
                  std::to_string(columns.size()));
    rows.push_back(std::move(row));
  }

  std::string body() const {
    std::string s;
    for (std::size_t c = 0; c < columns.size(); ++c) s += (c ? "," : "") + columns[c];
    s += "\n";
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c) s += (c ? "," : "") + format_number(r[c]);
      s += "\n";
    }
    return s;
  }

  std::string content_hash() const { return git_blob_sha1(body()); }

  std::string to_csv() const {
    std::string s = "# dataset: " + name + "\n";
    for (const auto& [k, v] : meta) s += "# " + k + ": " + v + "\n";
    s += "# units:";
    for (std::size_t c = 0; c < units.size(); ++c) s += (c ? "," : " ") + units[c];
    s += "\n# content_hash: " + content_hash() + "\n";
    return s + body();
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["dataset"] = name;
    nlohmann::ordered_json m = nlohmann::ordered_json::object();
    for (const auto& [k, v] : meta) m[k] = v;
    j["metadata"] = m;
    j["columns"] = columns;
    j["units"] = units;
    j["content_hash"] = content_hash();
    j["rows"] = rows;
    return j;
  }

  std::size_t column_index(const std::string& c) const {
    for (std::size_t k = 0; k < columns.size(); ++k)
      if (columns[k] == c) return k;
    throw Error("dataset " + name + " has no column " + c);
  }
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

inline void write_dataset(const Dataset& d, const std::filesystem::path& dir, bool json) {
  std::filesystem::create_directories(dir);
  write_text(dir / (d.name + ".csv"), d.to_csv());
  if (json) write_text(dir / (d.name + ".json"), d.to_json().dump(2) + "\n");
}

}  // namespace skcat
