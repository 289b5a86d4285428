#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace anfis {

enum class ErrorCode {
  parameter_domain,
  configuration,
  shape,
  rule_explosion,
  parse,
  version,
  invariant,
  data,
  domain,
  selection,
  io,
  summary,
};

const char *to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code survives
/// the trip across the C boundary as an anfis_status value.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message) : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class RuleExplosionError : public Error {
 public:
  RuleExplosionError(std::size_t rule_count, std::size_t max_rules);

  std::size_t rule_count() const noexcept { return rule_count_; }
  std::size_t max_rules() const noexcept { return max_rules_; }

 private:
  std::size_t rule_count_;
  std::size_t max_rules_;
};

}  // namespace anfis
