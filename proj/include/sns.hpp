#pragma once

#include "sns/basis.hpp"
#include "sns/compactness.hpp"
#include "sns/deterministic_2d.hpp"
#include "sns/ensemble.hpp"
#include "sns/error.hpp"
#include "sns/estimates.hpp"
#include "sns/field.hpp"
#include "sns/galerkin.hpp"
#include "sns/noise.hpp"
#include "sns/nonlinearity.hpp"
#include "sns/operators.hpp"
#include "sns/physical.hpp"
#include "sns/random.hpp"
#include "sns/io/bundle.hpp"
#include "sns/io/commands.hpp"
#include "sns/io/config.hpp"
