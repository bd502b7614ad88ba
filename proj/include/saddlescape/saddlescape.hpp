#pragma once

// Umbrella header: the factored low-rank optimization library.

#include "saddlescape/csv.hpp"
#include "saddlescape/experiments.hpp"
#include "saddlescape/factored.hpp"
#include "saddlescape/landscape.hpp"
#include "saddlescape/linalg.hpp"
#include "saddlescape/matrix.hpp"
#include "saddlescape/objectives.hpp"
#include "saddlescape/rng.hpp"
#include "saddlescape/solvers.hpp"
