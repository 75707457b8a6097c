#pragma once

#include "permcert/constants.hpp"
#include "permcert/conjecture.hpp"
#include "permcert/errors.hpp"
#include "permcert/experiments.hpp"
#include "permcert/hermitian.hpp"
#include "permcert/instances.hpp"
#include "permcert/io.hpp"
#include "permcert/permanent.hpp"
#include "permcert/rank_reduction.hpp"
#include "permcert/relaxation.hpp"
#include "permcert/rng.hpp"
#include "permcert/rounding.hpp"
#include "permcert/special.hpp"
