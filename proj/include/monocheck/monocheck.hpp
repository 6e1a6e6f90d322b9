/*
 * Copyright 2026 The Monocheck Authors.
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

#include "monocheck/art.hpp"
#include "monocheck/banking.hpp"
#include "monocheck/core.hpp"
#include "monocheck/datasets.hpp"
#include "monocheck/error.hpp"
#include "monocheck/external_model.hpp"
#include "monocheck/format.hpp"
#include "monocheck/harness.hpp"
#include "monocheck/model_spec.hpp"
#include "monocheck/models.hpp"
#include "monocheck/pt.hpp"
#include "monocheck/report.hpp"
#include "monocheck/rng.hpp"
#include "monocheck/tree.hpp"
#include "monocheck/vbt.hpp"
#include "monocheck/verifier.hpp"
