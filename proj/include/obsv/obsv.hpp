#pragma once

#include "obsv/bigint.hpp"
#include "obsv/compile.hpp"
#include "obsv/expr.hpp"
#include "obsv/files.hpp"
#include "obsv/fp_matrix.hpp"
#include "obsv/gradient.hpp"
#include "obsv/lie_oracle.hpp"
#include "obsv/metrics.hpp"
#include "obsv/model.hpp"
#include "obsv/observability.hpp"
#include "obsv/parser.hpp"
#include "obsv/polynomial.hpp"
#include "obsv/prime_field.hpp"
#include "obsv/randomization.hpp"
#include "obsv/report_io.hpp"
#include "obsv/series.hpp"
#include "obsv/slp.hpp"
#include "obsv/solver.hpp"
#include "obsv/symmetry.hpp"
#include "obsv/variational.hpp"
