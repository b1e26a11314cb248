#pragma once

// Umbrella header: the full library surface.

#include "motifcloss/census.hpp"
#include "motifcloss/closs.hpp"
#include "motifcloss/condensation.hpp"
#include "motifcloss/digraph.hpp"
#include "motifcloss/dynamics.hpp"
#include "motifcloss/measures.hpp"
#include "motifcloss/parallel.hpp"
#include "motifcloss/reference_systems.hpp"
#include "motifcloss/reports.hpp"
#include "motifcloss/rng.hpp"
#include "motifcloss/significance.hpp"
#include "motifcloss/version.hpp"
