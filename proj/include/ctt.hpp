#pragma once

#include "ctt/consensus.hpp"
#include "ctt/data.hpp"
#include "ctt/engine.hpp"
#include "ctt/error.hpp"
#include "ctt/experiment.hpp"
#include "ctt/features.hpp"
#include "ctt/metrics.hpp"
#include "ctt/network.hpp"
#include "ctt/privacy.hpp"
#include "ctt/rng.hpp"
#include "ctt/svd.hpp"
#include "ctt/tensor.hpp"
#include "ctt/topology.hpp"
#include "ctt/tt.hpp"
