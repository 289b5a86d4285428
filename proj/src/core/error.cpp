#include "anfis/error.hpp"

namespace anfis {

const char *to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::parameter_domain: return "parameter-domain error";
    case ErrorCode::configuration: return "configuration error";
    case ErrorCode::shape: return "shape error";
    case ErrorCode::rule_explosion: return "rule-explosion error";
    case ErrorCode::parse: return "parse error";
    case ErrorCode::version: return "version error";
    case ErrorCode::invariant: return "invariant violation";
    case ErrorCode::data: return "data error";
    case ErrorCode::domain: return "domain error";
    case ErrorCode::selection: return "selection error";
    case ErrorCode::io: return "I/O error";
    case ErrorCode::summary: return "summary error";
  }
  return "unknown error";
}

RuleExplosionError::RuleExplosionError(std::size_t rule_count, std::size_t max_rules)
    : Error(ErrorCode::rule_explosion, "rule explosion: grid partition needs " + std::to_string(rule_count) +
                                           " rules, limit is " + std::to_string(max_rules)),
      rule_count_(rule_count),
      max_rules_(max_rules) {}

}  // namespace anfis
