#pragma once

// Counterfactual-loss decision theory on finite spaces: additivity tests,
// identified risks and optimal policies under strong ignorability,
// standard-loss reductions, and a brute-force identifiability oracle.

#include "cfl/additivity.hpp"
#include "cfl/decomposition_io.hpp"
#include "cfl/distributions.hpp"
#include "cfl/equivalence.hpp"
#include "cfl/errors.hpp"
#include "cfl/estimation.hpp"
#include "cfl/linalg.hpp"
#include "cfl/loss.hpp"
#include "cfl/oracle.hpp"
#include "cfl/parallel.hpp"
#include "cfl/rational.hpp"
#include "cfl/risk.hpp"
#include "cfl/rng.hpp"
#include "cfl/spaces.hpp"
