#include "hpmp/theorem_variant.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

namespace hpmp {

VariantRules rules(TheoremVariant variant) {
  using H = StateJacobianHypothesis;
  switch (variant) {
    case TheoremVariant::Thm31:
      return {true, true, H::Invertible, false, false};
    case TheoremVariant::Thm32:
      return {true, true, H::Monotone, false, false};
    case TheoremVariant::Thm43:
      return {true, true, H::InvertibleOrMonotone, true, false};
    case TheoremVariant::Thm47:
      return {true, true, H::InvertibleOrMonotone, false, true};
    case TheoremVariant::Thm48:
      return {false, false, H::Invertible, false, true};
  }
  throw PreconditionError("unknown theorem variant");
}

bool compatible(TheoremVariant variant, ControlVariant controls) {
  switch (variant) {
    case TheoremVariant::Thm31:
    case TheoremVariant::Thm32:
      return controls == ControlVariant::Interior;
    case TheoremVariant::Thm43:
      return controls == ControlVariant::Inequalities;
    case TheoremVariant::Thm47:
      return controls == ControlVariant::Mixed;
    case TheoremVariant::Thm48:
      return true;
  }
  return false;
}

void require_compatible(TheoremVariant variant, const ProblemSpec& problem) {
  if (!compatible(variant, problem.controls.variant)) {
    throw PreconditionError(to_string(variant) + " does not apply to a problem with " +
                            to_string(problem.controls.variant) + " control sets");
  }
}

TheoremVariant default_variant(const ProblemSpec& problem) {
  if (problem.kind == SystemKind::Equation) return TheoremVariant::Thm48;
  switch (problem.controls.variant) {
    case ControlVariant::Interior:
      return TheoremVariant::Thm31;
    case ControlVariant::Inequalities:
      return TheoremVariant::Thm43;
    case ControlVariant::Mixed:
      return TheoremVariant::Thm47;
  }
  return TheoremVariant::Thm48;
}

TheoremVariant parse_variant(std::string_view text) {
  std::string key(text);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (key.rfind("thm", 0) == 0) key.erase(0, 3);
  static constexpr std::array<std::pair<std::string_view, TheoremVariant>, 5> kNames{{
      {"31", TheoremVariant::Thm31},
      {"32", TheoremVariant::Thm32},
      {"43", TheoremVariant::Thm43},
      {"47", TheoremVariant::Thm47},
      {"48", TheoremVariant::Thm48},
  }};
  for (const auto& [name, variant] : kNames) {
    if (key == name) return variant;
  }
  throw PreconditionError("unknown theorem variant '" + std::string(text) +
                          "' (expected one of Thm31, Thm32, Thm43, Thm47, Thm48)");
}

std::string to_string(TheoremVariant variant) {
  switch (variant) {
    case TheoremVariant::Thm31:
      return "Thm31";
    case TheoremVariant::Thm32:
      return "Thm32";
    case TheoremVariant::Thm43:
      return "Thm43";
    case TheoremVariant::Thm47:
      return "Thm47";
    case TheoremVariant::Thm48:
      return "Thm48";
  }
  return "?";
}

}  // namespace hpmp
