#pragma once
// Umbrella header.
#include "analysis.hpp"
#include "cli.hpp"
#include "config.hpp"
#include "geometry.hpp"
#include "greens.hpp"
#include "io.hpp"
#include "montecarlo.hpp"
#include "noise.hpp"
#include "pml.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "solver.hpp"
#include "source.hpp"
#include "studies.hpp"
