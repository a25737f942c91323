// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "nahmpole/io/config.hpp"
#include "nahmpole/io/field_file.hpp"
#include "nahmpole/io/report.hpp"
#include "nahmpole/io/run.hpp"
