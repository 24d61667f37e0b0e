#pragma once

#include "apkit/tolerances.hpp"
#include "apkit/vector.hpp"
#include "apkit/basis.hpp"
#include "apkit/cone.hpp"
#include "apkit/random.hpp"
#include "apkit/sets.hpp"
#include "apkit/alternating.hpp"
#include "apkit/diagnostics.hpp"
#include "apkit/problem.hpp"
#include "apkit/harness.hpp"
#include "apkit/report.hpp"
#include "apkit/verify.hpp"
