#include "tajweed/rules.hpp"

#include <string>

#include "tajweed/error.hpp"

namespace tajweed {

std::string_view to_string(RuleId rule) noexcept {
  switch (rule) {
    case RuleId::EdghamMeem: return "edgham_meem";
    case RuleId::EkhfaaMeem: return "ekhfaa_meem";
    case RuleId::TafkheemLam: return "tafkheem_lam";
    case RuleId::TarqeeqLam: return "tarqeeq_lam";
  }
  return "unknown";
}

std::string_view display_name(RuleId rule) noexcept {
  switch (rule) {
    case RuleId::EdghamMeem: return "Edgham Meem";
    case RuleId::EkhfaaMeem: return "Ekhfaa Meem";
    case RuleId::TafkheemLam: return "Tafkheem Lam";
    case RuleId::TarqeeqLam: return "Tarqeeq Lam";
  }
  return "Unknown";
}

RuleId parse_rule_id(std::string_view text) {
  for (RuleId r : kAllRules) {
    if (to_string(r) == text) return r;
  }
  fail(ErrorCode::InvalidArgument, "unknown rule id '" + std::string(text) + "'");
}

std::string_view to_string(Polarity polarity) noexcept {
  return polarity == Polarity::Right ? "Right" : "Wrong";
}

std::string_view label_name(const Label& label) noexcept {
  return label ? to_string(*label) : "None";
}

Label parse_label(std::string_view text) {
  if (text == "Right") return Polarity::Right;
  if (text == "Wrong") return Polarity::Wrong;
  if (text == "None") return std::nullopt;
  fail(ErrorCode::ParseError, "unknown polarity '" + std::string(text) + "'");
}

}  // namespace tajweed
