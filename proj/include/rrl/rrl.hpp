#pragma once

// Everything except the text formats in io.hpp, which additionally need
// nlohmann/json.

#include "core.hpp"
#include "distributions.hpp"
#include "error.hpp"
#include "estimators.hpp"
#include "losses.hpp"
#include "reliability.hpp"
#include "rng.hpp"
#include "version_space.hpp"
