#pragma once

// Umbrella header for the full toolkit.

#include "qpstab/analysis.hpp"
#include "qpstab/corpus.hpp"
#include "qpstab/functional.hpp"
#include "qpstab/io.hpp"
#include "qpstab/numeric.hpp"
#include "qpstab/simulate.hpp"
#include "qpstab/stability.hpp"
#include "qpstab/system.hpp"
#include "qpstab/transforms.hpp"
