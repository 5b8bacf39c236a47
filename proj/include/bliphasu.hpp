#pragma once

#include "bliphasu/complex_core.hpp"
#include "bliphasu/error.hpp"
#include "bliphasu/harness.hpp"
#include "bliphasu/instance_io.hpp"
#include "bliphasu/metrics.hpp"
#include "bliphasu/model.hpp"
#include "bliphasu/pipeline.hpp"
#include "bliphasu/refine.hpp"
#include "bliphasu/report.hpp"
#include "bliphasu/rng.hpp"
#include "bliphasu/spectral_init.hpp"
