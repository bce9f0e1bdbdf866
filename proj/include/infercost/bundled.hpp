#pragma once

#include <string_view>

#include "infercost/phase_model.hpp"
#include "infercost/roofline.hpp"
#include "infercost/xformer_cost.hpp"

namespace infercost::bundled {

// Text of the files under data/, compiled in so the CLI works without them.
std::string_view reference_coefficients_text();
std::string_view h100_profile_text();
std::string_view llama8b_spec_text();

CoefficientSet reference_coefficients();
HardwareProfile h100_profile();
ModelSpec llama8b_spec();

}  // namespace infercost::bundled
