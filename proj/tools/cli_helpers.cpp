#include "cli_helpers.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "tinytok/error.hpp"
#include "tinytok/io.hpp"
#include "tinytok/sha256.hpp"
#include "tinytok/version.hpp"

namespace tinytok::cli {

using nlohmann::json;

LogLevel log_level_from_string(const std::string& s) {
  if (s == "debug") return LogLevel::debug;
  if (s == "info") return LogLevel::info;
  if (s == "warn") return LogLevel::warn;
  if (s == "error") return LogLevel::error;
  if (s == "off") return LogLevel::off;
  throw UserError("unknown log level \"" + s + "\" (debug|info|warn|error|off)");
}

void Logger::emit(LogLevel level, const char* tag, const std::string& msg) const {
  if (level < level_) return;
  std::cerr << "[" << tag << "] " << msg << "\n";
}

Logger& logger() {
  static Logger instance;
  return instance;
}

Cfg Cfg::preload(int argc, char** argv) {
  Cfg cfg;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    std::string path;
    if (arg == "--config" && i + 1 < argc) {
      path = argv[i + 1];
    } else if (arg.rfind("--config=", 0) == 0) {
      path = arg.substr(9);
    } else {
      continue;
    }
    json parsed = json::parse(read_file(path), nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || !parsed.is_object()) {
      throw UserError("config file is not a JSON object: " + path);
    }
    cfg.data_ = std::move(parsed);
    cfg.path_ = path;
  }
  return cfg;
}

const json* Cfg::find(const std::string& section, const std::string& key) const {
  if (data_.is_null()) return nullptr;
  if (!section.empty()) {
    auto sec = data_.find(section);
    if (sec != data_.end() && sec->is_object()) {
      auto it = sec->find(key);
      if (it != sec->end()) return &*it;
    }
    return nullptr;
  }
  auto it = data_.find(key);
  return it != data_.end() ? &*it : nullptr;
}

double Cfg::num(const std::string& section, const std::string& key, double def) const {
  const json* v = find(section, key);
  if (!v) return def;
  if (!v->is_number()) throw UserError("config key \"" + key + "\" must be a number");
  return v->get<double>();
}

std::int64_t Cfg::integer(const std::string& section, const std::string& key,
                          std::int64_t def) const {
  const json* v = find(section, key);
  if (!v) return def;
  if (!v->is_number_integer()) throw UserError("config key \"" + key + "\" must be an integer");
  return v->get<std::int64_t>();
}

std::string Cfg::str(const std::string& section, const std::string& key,
                     const std::string& def) const {
  const json* v = find(section, key);
  if (!v) return def;
  if (!v->is_string()) throw UserError("config key \"" + key + "\" must be a string");
  return v->get<std::string>();
}

bool Cfg::boolean(const std::string& section, const std::string& key, bool def) const {
  const json* v = find(section, key);
  if (!v) return def;
  if (!v->is_boolean()) throw UserError("config key \"" + key + "\" must be a boolean");
  return v->get<bool>();
}

OutDir::OutDir(std::string root) : root_(std::move(root)) {
  if (root_.empty()) root_ = ".";
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
}

std::string OutDir::resolve(const std::string& relative) const {
  if (relative.empty()) throw UserError("output path must be non-empty");
  const std::filesystem::path p(relative);
  if (p.is_absolute()) {
    throw UserError("output path \"" + relative + "\" must be relative to --out-dir");
  }
  for (const auto& part : p) {
    if (part == "..") {
      throw UserError("output path \"" + relative + "\" escapes --out-dir");
    }
  }
  return (std::filesystem::path(root_) / p).string();
}

json provenance(std::uint64_t seed,
                const std::vector<std::pair<std::string, std::string>>& inputs,
                json options) {
  json p;
  p["tool"] = kToolName;
  p["version"] = kVersion;
  p["seed"] = seed;
  json in = json::object();
  for (const auto& [path, digest] : inputs) in[path] = "sha256:" + digest;
  p["inputs"] = in;
  p["options"] = std::move(options);
  return p;
}

std::pair<std::string, std::string> input_digest(const std::string& path) {
  return {path, sha256_file_hex(path)};
}

namespace {

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_sidecar(const std::string& report_path) {
  json meta;
  meta["written_at"] = utc_now_iso8601();
  write_file(report_path + ".meta.json", meta.dump(2) + "\n");
}

}  // namespace

std::string write_report(const OutDir& out, const std::string& relative, const json& report) {
  const std::string path = out.resolve(relative);
  write_file(path, report.dump(2) + "\n");
  write_sidecar(path);
  logger().info("wrote " + path);
  return path;
}

std::string write_text(const OutDir& out, const std::string& relative, const std::string& data) {
  const std::string path = out.resolve(relative);
  write_file(path, data);
  write_sidecar(path);
  logger().info("wrote " + path);
  return path;
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw UserError("bad number \"" + cell + "\" in list \"" + csv + "\"");
    }
  }
  if (values.empty()) throw UserError("expected a comma-separated number list, got \"" + csv + "\"");
  return values;
}

}  // namespace tinytok::cli
