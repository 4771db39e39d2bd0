#pragma once

#include <openssl/evp.h>

#include <fstream>
#include <string>
#include <string_view>

#include "fairflow/errors.hpp"
#include "fairflow/util.hpp"

namespace fairflow {

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr))
    throw Error(Errc::io_error, "SHA-256 digest failed");
  return to_hex(digest, len);
}

inline std::string sha256_file_hex(const fs::path& path) { return sha256_hex(read_file(path)); }

}  // namespace fairflow
