#pragma once

#include "regenmc/brownian_path.hpp"
#include "regenmc/errors.hpp"
#include "regenmc/estimator.hpp"
#include "regenmc/integrand.hpp"
#include "regenmc/local_time.hpp"
#include "regenmc/quadrature.hpp"
#include "regenmc/regeneration.hpp"
#include "regenmc/rng.hpp"
#include "regenmc/stats.hpp"
#include "regenmc/verification.hpp"
