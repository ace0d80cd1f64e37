#pragma once

#include "qlab/aging.hpp"
#include "qlab/constants.hpp"
#include "qlab/errors.hpp"
#include "qlab/expsim.hpp"
#include "qlab/fit.hpp"
#include "qlab/io.hpp"
#include "qlab/levmar.hpp"
#include "qlab/manifest.hpp"
#include "qlab/math.hpp"
#include "qlab/readout.hpp"
#include "qlab/rician.hpp"
#include "qlab/rng.hpp"
#include "qlab/stability.hpp"
#include "qlab/svg.hpp"
#include "qlab/tls.hpp"
#include "qlab/types.hpp"
