#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace praim {

/// Input file does not have the expected columns/layout. Always fatal.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A single record could not be parsed; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

/// A record parsed but violates a domain invariant (negative energy, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// 64-bit FNV-1a. Used for content digests, the stub embedder buckets and
// per-stage seed derivation.
inline constexpr std::uint64_t kFnv64Offset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnv64Prime = 1099511628211ull;

std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t state = kFnv64Offset);
std::uint64_t fnv1a64(std::string_view text,
                      std::uint64_t state = kFnv64Offset);

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double value);

/// Strict double parse; the whole token must be consumed.
double parse_double(std::string_view token, std::size_t line = 0);
/// Strict integer parse.
long long parse_int(std::string_view token, std::size_t line = 0);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     std::string_view content);

/// FNV-1a digest of a file's bytes, as a fixed-width hex string.
std::string file_digest_hex(const std::filesystem::path& path);

std::string_view trim(std::string_view s);

}  // namespace praim
