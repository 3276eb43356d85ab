#pragma once

#include "mrekit/constraints.hpp"
#include "mrekit/error.hpp"
#include "mrekit/information.hpp"
#include "mrekit/search_constants.hpp"
#include "mrekit/solver.hpp"
