#pragma once

#include "pdesym/canon.hpp"
#include "pdesym/datagen.hpp"
#include "pdesym/error.hpp"
#include "pdesym/evaluate.hpp"
#include "pdesym/expr.hpp"
#include "pdesym/filter.hpp"
#include "pdesym/grid_io.hpp"
#include "pdesym/metrics.hpp"
#include "pdesym/parallel.hpp"
#include "pdesym/parse.hpp"
#include "pdesym/perturb.hpp"
#include "pdesym/random.hpp"
#include "pdesym/solver.hpp"
#include "pdesym/study.hpp"
#include "pdesym/tokens.hpp"
