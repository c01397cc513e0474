// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "cpssd/collective.hpp"
#include "cpssd/commensurate.hpp"
#include "cpssd/config.hpp"
#include "cpssd/distributions.hpp"
#include "cpssd/errors.hpp"
#include "cpssd/montecarlo.hpp"
#include "cpssd/posterior.hpp"
#include "cpssd/quadrature.hpp"
#include "cpssd/special.hpp"
#include "cpssd/ssd.hpp"
#include "cpssd/sweep.hpp"
