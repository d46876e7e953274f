#pragma once

#include "thermoflow/errors.hpp"
#include "thermoflow/ode.hpp"
#include "thermoflow/spectral.hpp"
#include "thermoflow/geometry.hpp"
#include "thermoflow/generator.hpp"
#include "thermoflow/flow.hpp"
#include "thermoflow/jacobi.hpp"
#include "thermoflow/green.hpp"
#include "thermoflow/index_form.hpp"
#include "thermoflow/maslov.hpp"
#include "thermoflow/constructors.hpp"
