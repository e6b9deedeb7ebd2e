#include "boltzmann/app/output.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace boltzmann::app {

namespace fs = std::filesystem;

namespace {

std::string iso_time(std::chrono::system_clock::time_point tp) {
  const std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(long long v) { return std::to_string(v); }

Csv::Csv(std::initializer_list<const char*> header) : columns_(header.size()) {
  bool first = true;
  for (const char* h : header) {
    if (!first) text_ += ',';
    text_ += h;
    first = false;
  }
  text_ += '\n';
}

void Csv::row(std::initializer_list<std::string> fields) {
  if (fields.size() != columns_) throw std::logic_error("csv row width mismatch");
  bool first = true;
  for (const std::string& f : fields) {
    if (!first) text_ += ',';
    text_ += f;
    first = false;
  }
  text_ += '\n';
  ++rows_;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

OutputBundle::OutputBundle(std::string dir)
    : dir_(std::move(dir)),
      started_(std::chrono::system_clock::now()),
      clock_(std::chrono::steady_clock::now()) {
  fs::create_directories(dir_);
}

void OutputBundle::write(const std::string& name, const std::string& content) {
  const fs::path path = fs::path(dir_) / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  if (!out) throw std::runtime_error("cannot write " + path.string());
  files_.push_back({name, sha256_hex(content), content.size()});
}

void OutputBundle::finish(nlohmann::json info) {
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_).count();
  info["tool"] = "boltzmann";
  info["version"] = kVersion;
  info["started_utc"] = iso_time(started_);
  info["wall_clock_seconds"] = elapsed;
  nlohmann::json files = nlohmann::json::array();
  for (const FileRecord& f : files_) {
    files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  }
  info["files"] = files;
  std::ofstream out(fs::path(dir_) / "manifest.json", std::ios::trunc);
  out << info.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write manifest in " + dir_);
}

}  // namespace boltzmann::app
