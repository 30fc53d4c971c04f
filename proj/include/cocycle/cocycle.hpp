#pragma once

// Umbrella header for the library modules (the CLI lives in cli.hpp).

#include "cocycle/errors.hpp"
#include "cocycle/random.hpp"
#include "cocycle/free_group.hpp"
#include "cocycle/boundary.hpp"
#include "cocycle/actions.hpp"
#include "cocycle/entropy.hpp"
#include "cocycle/hyperfinite.hpp"
#include "cocycle/ergodic_avg.hpp"
#include "cocycle/subadditive.hpp"
