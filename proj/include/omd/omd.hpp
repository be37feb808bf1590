#pragma once

#include "omd/config.hpp"
#include "omd/data_stream.hpp"
#include "omd/diagnostics.hpp"
#include "omd/engine.hpp"
#include "omd/error.hpp"
#include "omd/geometry.hpp"
#include "omd/loss.hpp"
#include "omd/mirror_map.hpp"
#include "omd/rng.hpp"
#include "omd/runner.hpp"
#include "omd/verify.hpp"
