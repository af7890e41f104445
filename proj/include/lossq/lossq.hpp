// Copyright 2026 The lossq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include "lossq/calibration.hpp"
#include "lossq/core_model.hpp"
#include "lossq/decoy.hpp"
#include "lossq/error.hpp"
#include "lossq/gllp.hpp"
#include "lossq/io.hpp"
#include "lossq/key_rate.hpp"
#include "lossq/phase_error.hpp"
#include "lossq/qubit_audit.hpp"
#include "lossq/simulator.hpp"
#include "lossq/stats_bounds.hpp"
