/*
 * Copyright 2026 The treetweak Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Umbrella header.

#include "treetweak/costs.hpp"
#include "treetweak/error.hpp"
#include "treetweak/feature_space.hpp"
#include "treetweak/forest.hpp"
#include "treetweak/model_io.hpp"
#include "treetweak/recommend.hpp"
#include "treetweak/sweep.hpp"
#include "treetweak/synthetic.hpp"
#include "treetweak/trainer.hpp"
#include "treetweak/tweaker.hpp"
