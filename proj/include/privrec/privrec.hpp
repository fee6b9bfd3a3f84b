/*
 * Copyright 2026 The privrec Authors.
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

#include "privrec/dp_noise.hpp"
#include "privrec/errors.hpp"
#include "privrec/eval.hpp"
#include "privrec/feature_store.hpp"
#include "privrec/fusion.hpp"
#include "privrec/linalg.hpp"
#include "privrec/local_privacy.hpp"
#include "privrec/rng.hpp"
#include "privrec/scoring.hpp"
#include "privrec/stats.hpp"
#include "privrec/strategies.hpp"
#include "privrec/synthesize.hpp"
#include "privrec/weight_training.hpp"

namespace privrec {

inline constexpr const char* kVersion = "privrec 0.1.0";

}  // namespace privrec
