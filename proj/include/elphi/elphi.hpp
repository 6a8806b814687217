#pragma once

// Umbrella header for the empirical phi-divergence logistic regression
// toolkit.

#include "elphi/divergence.hpp"
#include "elphi/el.hpp"
#include "elphi/errors.hpp"
#include "elphi/inference.hpp"
#include "elphi/io.hpp"
#include "elphi/model.hpp"
#include "elphi/power.hpp"
#include "elphi/quadrature.hpp"
#include "elphi/rng.hpp"
#include "elphi/simulate.hpp"
#include "elphi/special.hpp"
