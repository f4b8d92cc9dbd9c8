#pragma once

// Umbrella header for the affine lattice-process toolkit.

#include "affine/affine_map.hpp"
#include "affine/classify.hpp"
#include "affine/counters.hpp"
#include "affine/errors.hpp"
#include "affine/io.hpp"
#include "affine/linalg.hpp"
#include "affine/model.hpp"
#include "affine/polynomial.hpp"
#include "affine/rational.hpp"
#include "affine/rng.hpp"
#include "affine/simulate.hpp"
#include "affine/transforms.hpp"
