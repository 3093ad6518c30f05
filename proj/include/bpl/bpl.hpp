#pragma once

// Umbrella header.

#include "bpl/asymptotics.hpp"
#include "bpl/catalog.hpp"
#include "bpl/classify.hpp"
#include "bpl/infinity.hpp"
#include "bpl/log.hpp"
#include "bpl/numerics.hpp"
#include "bpl/parser.hpp"
#include "bpl/pathtrace.hpp"
#include "bpl/polynomial.hpp"
#include "bpl/problem.hpp"
#include "bpl/strata.hpp"
#include "bpl/systems.hpp"
