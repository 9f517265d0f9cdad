#pragma once

#include "maxreg/commands.hpp"
#include "maxreg/config.hpp"
#include "maxreg/errors.hpp"
#include "maxreg/example_pde.hpp"
#include "maxreg/form_family.hpp"
#include "maxreg/grid_function.hpp"
#include "maxreg/harness.hpp"
#include "maxreg/hilbert_core.hpp"
#include "maxreg/matrix_exp.hpp"
#include "maxreg/operator_calculus.hpp"
#include "maxreg/qlr_engine.hpp"
#include "maxreg/reference_stepper.hpp"
