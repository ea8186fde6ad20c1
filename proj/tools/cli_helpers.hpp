#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace tinytok::cli {

enum class LogLevel { debug = 0, info, warn, error, off };

LogLevel log_level_from_string(const std::string& s);  // throws UserError

// Minimal stderr logger shared by every subcommand.
class Logger {
 public:
  void set_level(LogLevel level) { level_ = level; }
  void debug(const std::string& msg) const { emit(LogLevel::debug, "debug", msg); }
  void info(const std::string& msg) const { emit(LogLevel::info, "info", msg); }
  void warn(const std::string& msg) const { emit(LogLevel::warn, "warn", msg); }
  void error(const std::string& msg) const { emit(LogLevel::error, "error", msg); }

 private:
  void emit(LogLevel level, const char* tag, const std::string& msg) const;
  LogLevel level_ = LogLevel::info;
};

Logger& logger();

// Shared config file (JSON): top-level keys seed/threads/out_dir/log_level
// plus one object per subcommand.  Values found here become flag defaults,
// so explicit flags always win.
class Cfg {
 public:
  // Scans argv for --config before CLI11 parsing so file values can seed
  // the option defaults.
  static Cfg preload(int argc, char** argv);

  bool loaded() const { return !data_.is_null(); }
  const std::string& path() const { return path_; }

  double num(const std::string& section, const std::string& key, double def) const;
  std::int64_t integer(const std::string& section, const std::string& key,
                       std::int64_t def) const;
  std::string str(const std::string& section, const std::string& key,
                  const std::string& def) const;
  bool boolean(const std::string& section, const std::string& key, bool def) const;

 private:
  const nlohmann::json* find(const std::string& section, const std::string& key) const;
  nlohmann::json data_;
  std::string path_;
};

// Output-path policy: every artifact lands inside --out-dir; absolute paths
// and ".." escapes are rejected.
class OutDir {
 public:
  explicit OutDir(std::string root);
  std::string resolve(const std::string& relative) const;
  const std::string& root() const { return root_; }

 private:
  std::string root_;
};

// Provenance block embedded in every JSON report: tool identity, the seed,
// SHA-256 of each input, and the effective option values.  No wall-clock
// fields, so identical runs produce identical bytes.
nlohmann::json provenance(std::uint64_t seed,
                          const std::vector<std::pair<std::string, std::string>>& inputs,
                          nlohmann::json options);

// Digest helper for the provenance inputs list.
std::pair<std::string, std::string> input_digest(const std::string& path);

// Serializes with sorted keys and a trailing newline, writes inside the
// out-dir, and drops a "<name>.meta.json" sidecar carrying the timestamp.
std::string write_report(const OutDir& out, const std::string& relative,
                         const nlohmann::json& report);

// Raw-text variant (CSV, JSONL) with the same sidecar convention.
std::string write_text(const OutDir& out, const std::string& relative, const std::string& data);

std::vector<double> parse_double_list(const std::string& csv);  // "0.5,1,2.5"

}  // namespace tinytok::cli
