// Copyright 2026 The MNF Simulator Authors
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

#include "mnf/dataflow.hpp"
#include "mnf/error.hpp"
#include "mnf/events.hpp"
#include "mnf/generate.hpp"
#include "mnf/io.hpp"
#include "mnf/mapping.hpp"
#include "mnf/metrics.hpp"
#include "mnf/model.hpp"
#include "mnf/noc.hpp"
#include "mnf/oracle.hpp"
#include "mnf/pe_sim.hpp"
#include "mnf/random.hpp"
#include "mnf/system.hpp"
