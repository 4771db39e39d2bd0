#pragma once

#include <catch2/catch_amalgamated.hpp>

#include "fairflow/errors.hpp"

// Asserts that `expr` throws a fairflow::Error carrying exactly `errc`.
#define CHECK_THROWS_WITH_CODE(expr, errc)                             \
  do {                                                                 \
    bool thrown_ = false;                                              \
    try {                                                              \
      (void)(expr);                                                    \
    } catch (const fairflow::Error& e_) {                              \
      thrown_ = true;                                                  \
      INFO("message: " << e_.what());                                  \
      CHECK(e_.code() == (errc));                                      \
    }                                                                  \
    if (!thrown_) FAIL("expected " #expr " to throw " #errc);          \
  } while (0)
