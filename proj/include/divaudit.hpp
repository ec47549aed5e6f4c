//
// Copyright 2026 The divaudit Authors.
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
//

#ifndef DIVAUDIT_DIVAUDIT_HPP_
#define DIVAUDIT_DIVAUDIT_HPP_

#include "divaudit/adaptive.hpp"
#include "divaudit/baselines.hpp"
#include "divaudit/core.hpp"
#include "divaudit/divscore.hpp"
#include "divaudit/errors.hpp"
#include "divaudit/harness.hpp"
#include "divaudit/io.hpp"
#include "divaudit/random.hpp"
#include "divaudit/report_io.hpp"
#include "divaudit/synthgen.hpp"

#endif  // DIVAUDIT_DIVAUDIT_HPP_
