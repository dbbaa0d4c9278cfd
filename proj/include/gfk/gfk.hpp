// Core headers. The config-driven runner lives in gfk/experiment.hpp (needs Boost).
#ifndef GFK_GFK_HPP
#define GFK_GFK_HPP

#include "gfk/gfunction.hpp"
#include "gfk/random.hpp"
#include "gfk/csv.hpp"
#include "gfk/gheat.hpp"
#include "gfk/coefficients.hpp"
#include "gfk/cutoff.hpp"
#include "gfk/pde_solver.hpp"
#include "gfk/paths.hpp"

#endif
