#pragma once

#include <string>

#include "edgebal/simnet/config.hpp"

namespace edgebal::simnet {

// Declarative config document -> SimConfig. Unknown keys are ignored;
// malformed values throw std::invalid_argument.
SimConfig config_from_json(const std::string& text);
SimConfig config_from_file(const std::string& path);

}  // namespace edgebal::simnet
