// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nahmpole/core_domain.hpp"
#include "nahmpole/model_solutions.hpp"
#include "nahmpole/model_library.hpp"
#include "nahmpole/spectral.hpp"
#include "nahmpole/elliptic_solver.hpp"
#include "nahmpole/gauge_hermitian.hpp"
#include "nahmpole/cli_io.hpp"
