#pragma once

#include "nujd/core.hpp"
#include "nujd/errors.hpp"
#include "nujd/io.hpp"
#include "nujd/linalg.hpp"
#include "nujd/recipe.hpp"
#include "nujd/simulation.hpp"
#include "nujd/solvers.hpp"
#include "nujd/statistics.hpp"
#include "nujd/uniqueness.hpp"
