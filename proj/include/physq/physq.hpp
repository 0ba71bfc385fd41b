// physq.hpp
// Umbrella header.

#pragma once

#include "physq/coincidence.hpp"
#include "physq/csv.hpp"
#include "physq/dispersion.hpp"
#include "physq/inference.hpp"
#include "physq/prediction.hpp"
#include "physq/trial_engine.hpp"
