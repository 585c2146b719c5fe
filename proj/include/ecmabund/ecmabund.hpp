#pragma once

// Umbrella header: movement-based statistical models for space-time
// abundance data (snapshot, capture/recapture, EcoDiff baseline).

#include "capture.hpp"
#include "ecm.hpp"
#include "ecodiff.hpp"
#include "fitting.hpp"
#include "io.hpp"
#include "mvn.hpp"
#include "normal.hpp"
#include "optim.hpp"
#include "rect.hpp"
#include "rng.hpp"
#include "snapshot.hpp"
#include "study.hpp"
#include "trajectory.hpp"
