#pragma once

#include "biex/units.hpp"
#include "biex/error.hpp"
#include "biex/levels.hpp"
#include "biex/pulses.hpp"
#include "biex/hamiltonian.hpp"
#include "biex/dynamics.hpp"
#include "biex/metrics.hpp"
#include "biex/optimizer.hpp"
#include "biex/config_io.hpp"
#include "biex/validate.hpp"
#include "biex/app.hpp"
