#pragma once

#include "radcal/common.hpp"
#include "radcal/geo_map.hpp"
#include "radcal/error_model.hpp"
#include "radcal/ego_state.hpp"
#include "radcal/rotation_calib.hpp"
#include "radcal/translation_calib.hpp"
#include "radcal/metrics.hpp"
#include "radcal/sim.hpp"
#include "radcal/config.hpp"
#include "radcal/io.hpp"
#include "radcal/calibration.hpp"
