#pragma once

#include "evq/config.hpp"
#include "evq/core.hpp"
#include "evq/coupling.hpp"
#include "evq/demand.hpp"
#include "evq/des.hpp"
#include "evq/energy.hpp"
#include "evq/mmck.hpp"
#include "evq/station_model.hpp"
#include "evq/sweep.hpp"
#include "evq/synth.hpp"
