#pragma once

#include "mdisp/analysis.hpp"
#include "mdisp/cc_cases.hpp"
#include "mdisp/cli.hpp"
#include "mdisp/coefficients.hpp"
#include "mdisp/grid.hpp"
#include "mdisp/io.hpp"
#include "mdisp/ladder.hpp"
#include "mdisp/pressure.hpp"
#include "mdisp/scenario.hpp"
#include "mdisp/tensor.hpp"
#include "mdisp/transport.hpp"
#include "mdisp/wells.hpp"
