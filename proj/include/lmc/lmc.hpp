#pragma once

#include "errors.hpp"
#include "grid.hpp"
#include "calculus.hpp"
#include "norms.hpp"
#include "dsl.hpp"
#include "problem.hpp"
#include "tridiag.hpp"
#include "solver.hpp"
#include "two_scale.hpp"
#include "homogenized.hpp"
#include "study.hpp"
#include "config.hpp"
