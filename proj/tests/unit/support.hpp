#pragma once

#include <string>

#include <gtest/gtest.h>

#include "tdshift/error.hpp"

// Asserts that stmt throws tdshift::Error carrying the given code.
#define EXPECT_ERROR_CODE(stmt, expected)                                   \
  do {                                                                      \
    try {                                                                   \
      stmt;                                                                 \
      ADD_FAILURE() << "no exception, expected " << (expected);             \
    } catch (const tdshift::Error& e_) {                                    \
      EXPECT_EQ(e_.code(), std::string(expected)) << e_.what();             \
    }                                                                       \
  } while (0)
