// SPDX-License-Identifier: Apache-2.0
//
// rbeam - resonant beam positioning simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "rbeam/config.hpp"
#include "rbeam/csv.hpp"
#include "rbeam/evaluation.hpp"
#include "rbeam/geometry.hpp"
#include "rbeam/music.hpp"
#include "rbeam/parallel.hpp"
#include "rbeam/pattern.hpp"
#include "rbeam/propagation.hpp"
#include "rbeam/resonance.hpp"
#include "rbeam/rng.hpp"
