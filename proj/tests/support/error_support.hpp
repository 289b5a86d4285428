#pragma once

#include <optional>
#include <string>

#include "anfis/error.hpp"

namespace anfis::testing {

// Code of the anfis::Error thrown by fn, or nullopt if nothing (or something
// else) was thrown.
template <class F>
std::optional<ErrorCode> thrown_code(F &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  } catch (...) {
  }
  return std::nullopt;
}

template <class F>
std::string thrown_message(F &&fn) {
  try {
    fn();
  } catch (const std::exception &e) {
    return e.what();
  }
  return {};
}

}  // namespace anfis::testing
