#pragma once

#include <gtest/gtest.h>

#include <string>

#include "fspde/error.hpp"

/// Runs `stmt`, expecting fspde::Error of `kind` whose message contains `needle`.
#define EXPECT_FSPDE_ERROR(stmt, error_kind, needle)                                   \
  do {                                                                                 \
    try {                                                                              \
      stmt;                                                                            \
      ADD_FAILURE() << "expected fspde::Error from " #stmt;                            \
    } catch (const fspde::Error& e) {                                                  \
      EXPECT_EQ(e.kind(), error_kind) << e.what();                                     \
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos)                 \
          << "message: " << e.what() << "\nexpected to contain: " << (needle);         \
    }                                                                                  \
  } while (0)
