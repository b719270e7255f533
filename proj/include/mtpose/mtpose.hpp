#pragma once

// Umbrella header for the whole metamorphic-testing harness.

#include "mtpose/adapter.hpp"
#include "mtpose/error.hpp"
#include "mtpose/geometry.hpp"
#include "mtpose/image.hpp"
#include "mtpose/manifest.hpp"
#include "mtpose/metrics.hpp"
#include "mtpose/prediction.hpp"
#include "mtpose/preprocess.hpp"
#include "mtpose/report.hpp"
#include "mtpose/rng.hpp"
#include "mtpose/subprocess.hpp"
#include "mtpose/testcase.hpp"
#include "mtpose/testgen.hpp"
#include "mtpose/transforms.hpp"
#include "mtpose/verifier.hpp"
