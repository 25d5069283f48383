#pragma once

#include <string>
#include <string_view>

#include "hpmp/problem_model.hpp"

namespace hpmp {

/// Which multiplier theorem a certificate is checked against.
enum class TheoremVariant { Thm31, Thm32, Thm43, Thm47, Thm48 };

/// Stage-t (t >= 1) hypothesis on D1f that a variant relies on.
enum class StateJacobianHypothesis { Invertible, Monotone, InvertibleOrMonotone };

struct VariantRules {
  bool adjoint_nonnegative;  // p_t >= 0 in (Si)
  bool dynamic_slackness;    // p_{t+1}^alpha (f^alpha - x^alpha) = 0 in (Sl)
  StateJacobianHypothesis jacobian;
  bool separation_qualification;  // 0 outside co{active Dg}
  bool span_hull_qualification;   // span{De} and co{active Dg} disjoint, De independent
};

VariantRules rules(TheoremVariant variant);

/// Thm31/Thm32 need interior controls, Thm43 inequality rows, Thm47 mixed rows.
/// Thm48 accepts every control set (absent rows contribute empty sums).
bool compatible(TheoremVariant variant, ControlVariant controls);

/// Throws PreconditionError naming both sides when !compatible.
void require_compatible(TheoremVariant variant, const ProblemSpec& problem);

/// Equation systems default to Thm48; inequation systems to the variant
/// matching their control set.
TheoremVariant default_variant(const ProblemSpec& problem);

/// Accepts "Thm31", "thm31" or "31" (and likewise for the others).
TheoremVariant parse_variant(std::string_view text);

std::string to_string(TheoremVariant variant);

}  // namespace hpmp
