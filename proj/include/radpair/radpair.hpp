#pragma once

#include "radpair/bessel.hpp"
#include "radpair/envelope.hpp"
#include "radpair/error.hpp"
#include "radpair/master_equations.hpp"
#include "radpair/photon_stats.hpp"
#include "radpair/rng.hpp"
#include "radpair/spin_hilbert.hpp"
#include "radpair/trajectory.hpp"
