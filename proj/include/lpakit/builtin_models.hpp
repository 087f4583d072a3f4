#pragma once

#include <lpakit/model.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace lpakit {

/// Where the phosphoinositides of the GTPase model sit.
enum class PiClass { Slow, Fast };

/// u_t = a - u + u^2 v,  v_t = b - u^2 v.
ReactionModel schnakenberg();

/// u_t = a - u - rho u v/(1+u+K u^2),  v_t = alpha (b - v) - rho u v/(1+u+K u^2).
ReactionModel substrate_inhibition();

/// Nine-variable Cdc42/Rac/Rho and phosphoinositide polarity network.
/// Diffusivities are rescaled to the interval [-1,1] by (L0/2)^2.
ReactionModel gtpase_pi(PiClass pi_class = PiClass::Slow);

std::vector<std::string> builtin_names();

/// Throws ConfigError listing the available names for an unknown model.
ReactionModel builtin(std::string_view name);

}  // namespace lpakit
