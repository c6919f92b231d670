// Copyright 2026 The qfair Authors
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

#include "qfair/channel.hpp"
#include "qfair/common.hpp"
#include "qfair/encode.hpp"
#include "qfair/fairness.hpp"
#include "qfair/gates.hpp"
#include "qfair/kernels.hpp"
#include "qfair/lipschitz_dense.hpp"
#include "qfair/lipschitz_tn.hpp"
#include "qfair/measurement.hpp"
#include "qfair/model.hpp"
#include "qfair/model_io.hpp"
#include "qfair/qstate.hpp"
#include "qfair/report.hpp"
