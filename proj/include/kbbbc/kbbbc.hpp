#pragma once

#include "kbbbc/benchmarks.hpp"
#include "kbbbc/clustering.hpp"
#include "kbbbc/core.hpp"
#include "kbbbc/harness.hpp"
#include "kbbbc/metrics.hpp"
#include "kbbbc/optimizer.hpp"
#include "kbbbc/postprocess.hpp"
#include "kbbbc/rng.hpp"
