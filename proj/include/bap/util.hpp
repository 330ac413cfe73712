#pragma once

// Small filesystem and hashing helpers.

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bap {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for unusable configuration (bad flags, missing templates, unknown run).
class ConfigError : public Error {
 public:
  using Error::Error;
};

using Sha256 = std::array<unsigned char, 32>;

inline Sha256 sha256(std::string_view data) {
  Sha256 out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  return out;
}

inline std::string to_hex(const unsigned char* p, std::size_t n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back(digits[p[i] >> 4]);
    s.push_back(digits[p[i] & 0xf]);
  }
  return s;
}

// Failures of completion and embedding backends. Only `transient` is retried.
enum class ProviderErrorKind { transient, retries_exhausted, authentication, malformed_response, rejected };

inline std::string_view to_string(ProviderErrorKind k) {
  switch (k) {
    case ProviderErrorKind::transient: return "transient";
    case ProviderErrorKind::retries_exhausted: return "retries_exhausted";
    case ProviderErrorKind::authentication: return "authentication";
    case ProviderErrorKind::malformed_response: return "malformed_response";
    case ProviderErrorKind::rejected: return "rejected";
  }
  return "?";
}

class ProviderError : public Error {
 public:
  ProviderError(ProviderErrorKind kind, const std::string& msg)
      : Error(std::string(to_string(kind)) + ": " + msg), kind_(kind) {}
  ProviderErrorKind kind() const { return kind_; }
  bool retryable() const { return kind_ == ProviderErrorKind::transient; }

 private:
  ProviderErrorKind kind_;
};

inline std::string sha256_hex(std::string_view data) {
  auto d = sha256(data);
  return to_hex(d.data(), d.size());
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes to a sibling temp file and renames over the target, so readers see
// either the old or the new content and a crash leaves no partial file.
inline void write_file_atomic(const std::filesystem::path& p, std::string_view data) {
  namespace fs = std::filesystem;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  thread_local std::mt19937_64 rng{std::random_device{}()};
  fs::path tmp = p;
  tmp += ".tmp" + std::to_string(rng());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot rename onto " + p.string() + ": " + ec.message());
  }
}

inline std::string to_lower_ascii(std::string_view s) {
  std::string r(s);
  for (char& c : r)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return r;
}

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace bap
