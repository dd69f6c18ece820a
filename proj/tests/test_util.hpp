#pragma once

#include "doctest.h"
#include "swingest/errors.hpp"

// Error code thrown by fn; fails the test when nothing is thrown.
template <class Fn>
swingest::ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const swingest::Error& e) {
    return e.code();
  }
  FAIL("expected swingest::Error");
  return swingest::ErrorCode::InvalidArgument;
}
