#pragma once

#include <unicode/unorm2.h>
#include <unicode/ustring.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairflow/errors.hpp"
#include "fairflow/util.hpp"

namespace fairflow {

using json = nlohmann::json;

// Canonical JSON: object keys NFC-normalized and byte-wise sorted, no
// whitespace, doubles in shortest round-trip decimal form, -0 folded to 0,
// strings NFC-normalized with minimal escaping. These rules are a
// compatibility contract (cache keys depend on them); see README.
namespace canonical_detail {

inline bool is_ascii(std::string_view s) {
  for (unsigned char c : s)
    if (c >= 0x80) return false;
  return true;
}

inline std::string nfc(std::string_view s) {
  if (is_ascii(s)) return std::string(s);
  UErrorCode ec = U_ZERO_ERROR;
  const UNormalizer2* norm = unorm2_getNFCInstance(&ec);
  if (U_FAILURE(ec)) throw Error(Errc::io_error, "ICU NFC unavailable");

  std::vector<UChar> u16(s.size() + 1);
  int32_t u16len = 0;
  u_strFromUTF8(u16.data(), static_cast<int32_t>(u16.size()), &u16len, s.data(),
                static_cast<int32_t>(s.size()), &ec);
  if (U_FAILURE(ec)) throw Error(Errc::io_error, "invalid UTF-8 in string value");

  std::vector<UChar> out(static_cast<size_t>(u16len) * 3 + 16);
  int32_t outlen = unorm2_normalize(norm, u16.data(), u16len, out.data(),
                                    static_cast<int32_t>(out.size()), &ec);
  if (U_FAILURE(ec)) throw Error(Errc::io_error, "NFC normalization failed");

  std::string res(static_cast<size_t>(outlen) * 3 + 16, '\0');
  int32_t reslen = 0;
  u_strToUTF8(res.data(), static_cast<int32_t>(res.size()), &reslen, out.data(), outlen, &ec);
  if (U_FAILURE(ec)) throw Error(Errc::io_error, "NFC re-encoding failed");
  res.resize(static_cast<size_t>(reslen));
  return res;
}

inline void emit_string(const std::string& raw, std::string& out) {
  out += '"';
  for (unsigned char c : nfc(raw)) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

inline void emit(const json& v, std::string& out) {
  switch (v.type()) {
    case json::value_t::null: out += "null"; break;
    case json::value_t::boolean: out += v.get<bool>() ? "true" : "false"; break;
    case json::value_t::number_integer: out += std::to_string(v.get<int64_t>()); break;
    case json::value_t::number_unsigned: out += std::to_string(v.get<uint64_t>()); break;
    case json::value_t::number_float: {
      double d = v.get<double>();
      if (!std::isfinite(d)) throw Error(Errc::io_error, "non-finite number in canonical form");
      if (d == 0.0) d = 0.0;  // fold -0
      out += shortest_double(d);
      break;
    }
    case json::value_t::string: emit_string(v.get<std::string>(), out); break;
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += ',';
        first = false;
        emit(e, out);
      }
      out += ']';
      break;
    }
    case json::value_t::object: {
      std::vector<std::pair<std::string, const json*>> items;
      items.reserve(v.size());
      for (auto it = v.begin(); it != v.end(); ++it) items.emplace_back(nfc(it.key()), &it.value());
      std::sort(items.begin(), items.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      for (size_t i = 1; i < items.size(); ++i)
        if (items[i].first == items[i - 1].first)
          throw Error(Errc::io_error, "duplicate key after NFC normalization: " + items[i].first);
      out += '{';
      bool first = true;
      for (const auto& [key, val] : items) {
        if (!first) out += ',';
        first = false;
        emit_string(key, out);
        out += ':';
        emit(*val, out);
      }
      out += '}';
      break;
    }
    default: throw Error(Errc::io_error, "unsupported JSON value in canonical form");
  }
}

}  // namespace canonical_detail

inline std::string canonical_json(const json& v) {
  std::string out;
  canonical_detail::emit(v, out);
  return out;
}

}  // namespace fairflow
