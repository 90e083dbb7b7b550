#pragma once

// Umbrella header: everything needed to compute weighted equilibrium measures
// on the unit circle — the density, its support, the Robin constant, minimal
// energy and capacity — plus the independent discretized-energy oracle.

#include "arcs.hpp"
#include "density.hpp"
#include "field.hpp"
#include "io.hpp"
#include "oracle.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"
#include "sqrt_branch.hpp"
#include "support.hpp"
#include "verify.hpp"
