#pragma once

#include "evodrive/arena.hpp"
#include "evodrive/behaviors.hpp"
#include "evodrive/common.hpp"
#include "evodrive/controllers.hpp"
#include "evodrive/evolution.hpp"
#include "evodrive/experiment.hpp"
#include "evodrive/fitness.hpp"
#include "evodrive/geometry.hpp"
#include "evodrive/io.hpp"
#include "evodrive/network.hpp"
#include "evodrive/pipeline.hpp"
#include "evodrive/rng.hpp"
#include "evodrive/simulation.hpp"
