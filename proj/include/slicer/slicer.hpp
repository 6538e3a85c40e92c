#pragma once

#include "slicer/closed_form.hpp"
#include "slicer/compensated_sum.hpp"
#include "slicer/counter_rng.hpp"
#include "slicer/ensemble_mc.hpp"
#include "slicer/io.hpp"
#include "slicer/levy_walk.hpp"
#include "slicer/measure_engine.hpp"
#include "slicer/parallel.hpp"
#include "slicer/sampling.hpp"
#include "slicer/slicer_core.hpp"
#include "slicer/transport_analysis.hpp"
#include "slicer/version.hpp"
