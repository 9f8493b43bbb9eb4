#pragma once

// Fuel-minimal, collision-aware thruster scheduling for a chaser spacecraft
// tracking a numerically given target trajectory.

#include "sotrack/config.hpp"
#include "sotrack/dynamics.hpp"
#include "sotrack/ephemeris.hpp"
#include "sotrack/nlp.hpp"
#include "sotrack/outputs.hpp"
#include "sotrack/pipeline.hpp"
#include "sotrack/solver.hpp"
#include "sotrack/transcription.hpp"
#include "sotrack/vec3.hpp"
