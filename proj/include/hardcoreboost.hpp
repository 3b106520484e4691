#pragma once

#include "hardcoreboost/bounds.hpp"
#include "hardcoreboost/error.hpp"
#include "hardcoreboost/experiments.hpp"
#include "hardcoreboost/hardcore.hpp"
#include "hardcoreboost/hypotheses.hpp"
#include "hardcoreboost/losses.hpp"
#include "hardcoreboost/lp.hpp"
#include "hardcoreboost/matrix.hpp"
#include "hardcoreboost/optimize.hpp"
#include "hardcoreboost/risk.hpp"
#include "hardcoreboost/sample.hpp"
#include "hardcoreboost/weighting.hpp"
