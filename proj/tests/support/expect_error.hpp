#pragma once

#include <gtest/gtest.h>

#include "vcg/error.hpp"

// Passes when `stmt` throws vcg::Error carrying `expected`.
#define EXPECT_VCG_ERROR(stmt, expected)                                                      \
  do {                                                                                        \
    try {                                                                                     \
      (void)(stmt);                                                                         \
      ADD_FAILURE() << #stmt " did not throw";                                                \
    } catch (const vcg::Error& e_) {                                                          \
      EXPECT_EQ(vcg::to_string(e_.code()), vcg::to_string(expected)) << e_.what();            \
    }                                                                                         \
  } while (0)
