#pragma once

#include "ivbma/cli.hpp"
#include "ivbma/core.hpp"
#include "ivbma/csv.hpp"
#include "ivbma/data.hpp"
#include "ivbma/kernels.hpp"
#include "ivbma/model_space.hpp"
#include "ivbma/parallel.hpp"
#include "ivbma/replicate.hpp"
#include "ivbma/rng.hpp"
#include "ivbma/sampler.hpp"
#include "ivbma/simulate.hpp"
#include "ivbma/summary.hpp"
