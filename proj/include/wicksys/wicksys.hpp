#pragma once

// Umbrella header for the wicksys library: truncated chaos-expansion algebra,
// Wick multiplication operators, and stability certification for random
// discrete- and continuous-time linear systems.

#include "wicksys/errors.hpp"
#include "wicksys/multi_index.hpp"
#include "wicksys/chaos.hpp"
#include "wicksys/sampling.hpp"
#include "wicksys/multiplier.hpp"
#include "wicksys/report.hpp"
#include "wicksys/serialization.hpp"
#include "wicksys/discrete.hpp"
#include "wicksys/continuous.hpp"
#include "wicksys/system_io.hpp"
