#pragma once
// Umbrella header for the front laboratory.

#include "kpp/acceptance.hpp"
#include "kpp/asymptotics.hpp"
#include "kpp/harness.hpp"
#include "kpp/interp.hpp"
#include "kpp/io.hpp"
#include "kpp/model.hpp"
#include "kpp/observables.hpp"
#include "kpp/quadrature.hpp"
#include "kpp/routes.hpp"
#include "kpp/solver.hpp"
#include "kpp/util.hpp"
#include "kpp/wave.hpp"
