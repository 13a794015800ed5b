#ifndef PREMSEL_UTIL_HPP
#define PREMSEL_UTIL_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace premsel {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames over the target, so readers never
// observe a half-written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Splits on any run of whitespace; no empty tokens.
std::vector<std::string> split_ws(std::string_view text);

std::string_view trim(std::string_view text);

// FNV-1a over raw bytes. Used for input manifests and cache keys; not
// cryptographic.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t value);

// Runs fn(0..n-1) on `workers` threads. Results must be written to
// preallocated slots so the outcome does not depend on scheduling.
// workers <= 1 runs inline. The first exception thrown by any worker is
// rethrown on the calling thread.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& fn);

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace premsel

#endif  // PREMSEL_UTIL_HPP
