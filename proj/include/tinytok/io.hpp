#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace tinytok {

// Records lines skipped during a lenient load.  Reasons are capped so a
// pathological file cannot blow up memory; the count is always exact.
struct SkipReport {
  std::size_t skipped = 0;
  std::vector<std::pair<std::size_t, std::string>> reasons;  // (line number, why)
  static constexpr std::size_t kMaxReasons = 100;

  void add(std::size_t line, std::string why) {
    ++skipped;
    if (reasons.size() < kMaxReasons) reasons.emplace_back(line, std::move(why));
  }
};

// Streams a file line by line (LF or CRLF), invoking fn(line_number, line)
// with 1-based numbering and the terminator stripped.  A final line without
// a trailing newline is still delivered.  Throws UserError if the file
// cannot be opened.
void for_each_line(const std::string& path,
                   const std::function<void(std::size_t, const std::string&)>& fn);

// Reads a whole file as bytes.  Throws UserError if it cannot be opened.
std::string read_file(const std::string& path);

// Writes bytes, creating parent directories as needed.  Throws UserError on
// failure.
void write_file(const std::string& path, const std::string& data);

// Splits work over [0, n) into contiguous chunks, one worker per chunk, and
// calls fn(begin, end, chunk_index) on each.  Results must be merged by the
// caller in chunk order so the outcome is independent of thread scheduling.
// threads == 0 means hardware concurrency.
void parallel_chunks(std::size_t n, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

// Number of chunks parallel_chunks will use for the given n and threads.
std::size_t parallel_chunk_count(std::size_t n, std::size_t threads);

}  // namespace tinytok
