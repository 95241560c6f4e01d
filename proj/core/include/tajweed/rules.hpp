#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace tajweed {

enum class RuleId : std::uint8_t {
  EdghamMeem = 0,
  EkhfaaMeem = 1,
  TafkheemLam = 2,
  TarqeeqLam = 3,
};

inline constexpr std::array kAllRules{RuleId::EdghamMeem, RuleId::EkhfaaMeem,
                                      RuleId::TafkheemLam, RuleId::TarqeeqLam};

/// Identifier form, e.g. "edgham_meem".
std::string_view to_string(RuleId rule) noexcept;
/// Human form used in confusion tables, e.g. "Edgham Meem".
std::string_view display_name(RuleId rule) noexcept;
/// Throws InvalidArgument on unknown names.
RuleId parse_rule_id(std::string_view text);

/// Right = correct pronunciation (SVM class +1), Wrong = -1.
enum class Polarity : std::uint8_t { Right = 0, Wrong = 1 };

/// nullopt stands for "no rule present" (a negative).
using Label = std::optional<Polarity>;

std::string_view to_string(Polarity polarity) noexcept;
/// "Right", "Wrong" or "None".
std::string_view label_name(const Label& label) noexcept;
/// Accepts "Right", "Wrong", "None" (case-sensitive).
Label parse_label(std::string_view text);

inline int svm_label(Polarity p) noexcept { return p == Polarity::Right ? 1 : -1; }

}  // namespace tajweed
