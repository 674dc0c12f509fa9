// opaquer: umbrella header.
#pragma once

#include "opaquer/automaton.hpp"
#include "opaquer/compose.hpp"
#include "opaquer/errors.hpp"
#include "opaquer/fuzz.hpp"
#include "opaquer/local.hpp"
#include "opaquer/model_io.hpp"
#include "opaquer/observer.hpp"
#include "opaquer/opacity.hpp"
