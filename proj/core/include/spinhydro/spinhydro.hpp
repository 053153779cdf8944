#pragma once

#include "spinhydro/analytic.hpp"
#include "spinhydro/csv.hpp"
#include "spinhydro/derivatives.hpp"
#include "spinhydro/ensemble.hpp"
#include "spinhydro/frame_io.hpp"
#include "spinhydro/hydro.hpp"
#include "spinhydro/identities.hpp"
#include "spinhydro/phase.hpp"
#include "spinhydro/propagator.hpp"
#include "spinhydro/residuals.hpp"
#include "spinhydro/state.hpp"
#include "spinhydro/trajectory.hpp"
