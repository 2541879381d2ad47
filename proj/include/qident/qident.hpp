// Copyright 2026 The qident Authors
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

#pragma once

#include "qident/core/bloch.hpp"
#include "qident/core/error.hpp"
#include "qident/core/evolution.hpp"
#include "qident/core/operators.hpp"
#include "qident/core/subspace.hpp"
#include "qident/core/types.hpp"
#include "qident/device/device_model.hpp"
#include "qident/device/measurement.hpp"
#include "qident/device/rng.hpp"
#include "qident/device/simulator.hpp"
#include "qident/spectral/confinement.hpp"
#include "qident/spectral/harmonic.hpp"
#include "qident/spectral/lorentzian.hpp"
#include "qident/spectral/spectrum.hpp"
#include "qident/protocols/decoherence.hpp"
#include "qident/protocols/leakage.hpp"
#include "qident/protocols/parallel.hpp"
#include "qident/protocols/qubit.hpp"
#include "qident/control/control_fit.hpp"
