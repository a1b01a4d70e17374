// Copyright 2026 The idmpf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.

#ifndef IDMPF__IDMPF_HPP_
#define IDMPF__IDMPF_HPP_

#include "idmpf/adapters.hpp"
#include "idmpf/config.hpp"
#include "idmpf/data.hpp"
#include "idmpf/errors.hpp"
#include "idmpf/filter.hpp"
#include "idmpf/grid.hpp"
#include "idmpf/metrics.hpp"
#include "idmpf/models.hpp"
#include "idmpf/parallel.hpp"
#include "idmpf/pipeline.hpp"
#include "idmpf/report.hpp"
#include "idmpf/rng.hpp"
#include "idmpf/sim.hpp"
#include "idmpf/synth.hpp"
#include "idmpf/version.hpp"

#endif  // IDMPF__IDMPF_HPP_
