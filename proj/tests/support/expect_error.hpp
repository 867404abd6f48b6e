#pragma once

#include <gtest/gtest.h>

#include "clric/error.hpp"

namespace clric::testing {

// Kind of the clric::Error thrown by fn; records a failure if none is thrown.
template <typename Fn>
ErrorKind error_kind(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kConfiguration;
}

}  // namespace clric::testing
