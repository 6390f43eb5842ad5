#pragma once

#include "vyoung/catalog.hpp"
#include "vyoung/covariance.hpp"
#include "vyoung/errors.hpp"
#include "vyoung/integrator.hpp"
#include "vyoung/kernels.hpp"
#include "vyoung/operators.hpp"
#include "vyoung/parallel.hpp"
#include "vyoung/quadrature.hpp"
#include "vyoung/regularity.hpp"
