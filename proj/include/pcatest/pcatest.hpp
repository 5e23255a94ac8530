#pragma once

#include "pcatest/errors.hpp"
#include "pcatest/estimators.hpp"
#include "pcatest/io.hpp"
#include "pcatest/matrix.hpp"
#include "pcatest/montecarlo.hpp"
#include "pcatest/operators.hpp"
#include "pcatest/quadrature.hpp"
#include "pcatest/radial.hpp"
#include "pcatest/rng.hpp"
#include "pcatest/scores.hpp"
#include "pcatest/special.hpp"
#include "pcatest/statistics.hpp"
