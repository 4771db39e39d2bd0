#pragma once

#include <array>
#include <charconv>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <system_error>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "fairflow/errors.hpp"

namespace fairflow {

namespace fs = std::filesystem;

// Shortest decimal form that re-parses to the same double. -0.0 must be
// normalized by the caller where canonical form requires it.
inline std::string shortest_double(double v) {
  std::array<char, 32> buf{};
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw Error(Errc::io_error, "double formatting failed");
  return std::string(buf.data(), p);
}

inline std::string to_hex(const unsigned char* data, size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(n * 2, '0');
  for (size_t i = 0; i < n; ++i) {
    out[2 * i] = kDigits[data[i] >> 4];
    out[2 * i + 1] = kDigits[data[i] & 0xf];
  }
  return out;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::io_error, "read failed: " + path.string());
  return data;
}

inline void write_file(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot create " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) throw Error(Errc::io_error, "write failed: " + path.string());
}

// Write-to-temp-then-rename so readers never observe a torn file.
inline void write_file_atomic(const fs::path& path, std::string_view data) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  write_file(tmp, data);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::io_error, "rename failed: " + path.string());
  }
}

// Advisory lock held for the lifetime of the object (flock, blocking).
class FileLock {
 public:
  explicit FileLock(const fs::path& path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(Errc::io_error, "cannot open lock file " + path.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw Error(Errc::io_error, "flock failed on " + path.string());
    }
  }
  ~FileLock() {
    if (fd_ >= 0) {
      ::flock(fd_, LOCK_UN);
      ::close(fd_);
    }
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

inline std::string format_iso8601(std::chrono::system_clock::time_point tp) {
  using namespace std::chrono;
  auto ms = duration_cast<milliseconds>(tp.time_since_epoch()).count();
  std::time_t secs = static_cast<std::time_t>(ms / 1000);
  int frac = static_cast<int>(ms % 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, frac);
  return buf;
}

inline std::string now_iso8601() { return format_iso8601(std::chrono::system_clock::now()); }

// ULID: 48-bit millisecond timestamp + 80 random bits, Crockford base32.
// Monotonic within the process so ids sort by insertion order even when
// generated inside the same millisecond.
inline std::string new_ulid() {
  static constexpr char kAlphabet[] = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";
  static std::mutex mu;
  static uint64_t last_ms = 0;
  static std::array<uint8_t, 10> last_rand{};

  using namespace std::chrono;
  uint64_t ms =
      static_cast<uint64_t>(duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count());

  std::array<uint8_t, 10> rnd{};
  {
    std::lock_guard<std::mutex> lock(mu);
    if (ms <= last_ms) {
      // same (or rewound) millisecond: increment previous randomness
      ms = last_ms;
      rnd = last_rand;
      for (int i = 9; i >= 0; --i) {
        if (++rnd[i] != 0) break;
      }
    } else {
      static thread_local std::mt19937_64 gen(std::random_device{}() ^
                                              (static_cast<uint64_t>(::getpid()) << 32));
      uint64_t a = gen(), b = gen();
      std::memcpy(rnd.data(), &a, 8);
      std::memcpy(rnd.data() + 8, &b, 2);
    }
    last_ms = ms;
    last_rand = rnd;
  }

  std::array<uint8_t, 16> bytes{};
  for (int i = 0; i < 6; ++i) bytes[i] = static_cast<uint8_t>(ms >> (8 * (5 - i)));
  std::memcpy(bytes.data() + 6, rnd.data(), 10);

  // 16 bytes = 128 bits -> 26 base32 chars (2 leading pad bits)
  std::string out(26, '0');
  int bitpos = -2;  // treat as 130-bit field, top 2 bits zero
  for (int i = 0; i < 26; ++i) {
    int value = 0;
    for (int b = 0; b < 5; ++b) {
      int bit = bitpos + i * 5 + b;
      int byte = bit / 8;
      value <<= 1;
      if (bit >= 0 && byte < 16) value |= (bytes[static_cast<size_t>(byte)] >> (7 - bit % 8)) & 1;
    }
    out[static_cast<size_t>(i)] = kAlphabet[value];
  }
  return out;
}

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline bool icontains(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return true;
  return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

inline std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

}  // namespace fairflow
