#pragma once

#include "kstream/baselines.hpp"
#include "kstream/error.hpp"
#include "kstream/eval.hpp"
#include "kstream/evidence.hpp"
#include "kstream/graph.hpp"
#include "kstream/linker.hpp"
#include "kstream/methods.hpp"
#include "kstream/min_cost_flow.hpp"
#include "kstream/parallel.hpp"
#include "kstream/patterns.hpp"
#include "kstream/relsim.hpp"
#include "kstream/stream.hpp"
