#pragma once

// Output bundle: data files, figures and a manifest listing every file with
// its SHA-256. The manifest is always written last.

#include <chrono>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "json.hpp"

namespace boltzmann::app {

inline constexpr const char* kVersion = "1.0.0";

/// 17 significant digits; NaN is written as an empty field.
std::string fmt(double v);
std::string fmt(long long v);
inline std::string fmt(int v) { return fmt(static_cast<long long>(v)); }
inline std::string fmt(bool v) { return v ? "1" : "0"; }

/// Accumulates CSV text row by row.
class Csv {
 public:
  explicit Csv(std::initializer_list<const char*> header);
  /// Fields are already formatted; the count must match the header.
  void row(std::initializer_list<std::string> fields);
  const std::string& text() const { return text_; }
  std::size_t rows() const { return rows_; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

std::string sha256_hex(const std::string& data);

struct FileRecord {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

class OutputBundle {
 public:
  /// Creates the directory if needed.
  explicit OutputBundle(std::string dir);

  void write(const std::string& name, const std::string& content);
  const std::vector<FileRecord>& files() const { return files_; }
  const std::string& dir() const { return dir_; }

  /// Writes manifest.json: `info` plus version, timing and the file list.
  void finish(nlohmann::json info);

 private:
  std::string dir_;
  std::vector<FileRecord> files_;
  std::chrono::system_clock::time_point started_;
  std::chrono::steady_clock::time_point clock_;
};

}  // namespace boltzmann::app
