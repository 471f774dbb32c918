#pragma once

#include "confsub/rational.hpp"
#include "confsub/hypergraph.hpp"
#include "confsub/maxflow.hpp"
#include "confsub/parametric_cut.hpp"
#include "confsub/compressor.hpp"
#include "confsub/rng.hpp"
#include "confsub/conformal.hpp"
#include "confsub/baselines.hpp"
#include "confsub/samplers.hpp"
#include "confsub/experiments.hpp"
