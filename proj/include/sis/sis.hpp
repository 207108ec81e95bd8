#pragma once

#include <sis/analysis.hpp>
#include <sis/equilibrium.hpp>
#include <sis/error.hpp>
#include <sis/format.hpp>
#include <sis/linalg.hpp>
#include <sis/log.hpp>
#include <sis/model.hpp>
#include <sis/model_io.hpp>
#include <sis/parallel.hpp>
#include <sis/random.hpp>
#include <sis/sim.hpp>
#include <sis/sweep.hpp>
