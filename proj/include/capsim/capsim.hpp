#pragma once

#include "capsim/auction.hpp"
#include "capsim/diagnostics.hpp"
#include "capsim/economics.hpp"
#include "capsim/efc.hpp"
#include "capsim/io.hpp"
#include "capsim/parallel.hpp"
#include "capsim/risk.hpp"
#include "capsim/rng.hpp"
#include "capsim/storage_dispatch.hpp"
#include "capsim/system_model.hpp"
#include "capsim/types.hpp"
