#pragma once

// Umbrella header for the membrane-works toolkit.

#include "memws/allan.hpp"
#include "memws/config.hpp"
#include "memws/csv.hpp"
#include "memws/emsim.hpp"
#include "memws/errors.hpp"
#include "memws/hungarian.hpp"
#include "memws/linfit.hpp"
#include "memws/manifest.hpp"
#include "memws/membrane.hpp"
#include "memws/rk4.hpp"
#include "memws/spectral.hpp"
#include "memws/stress.hpp"
#include "memws/synth.hpp"
#include "memws/version.hpp"
