// Copyright 2026 The RCAS Authors
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

#include "rcas/config.hpp"
#include "rcas/costmodel.hpp"
#include "rcas/domain.hpp"
#include "rcas/error.hpp"
#include "rcas/external.hpp"
#include "rcas/io.hpp"
#include "rcas/objective.hpp"
#include "rcas/oracle.hpp"
#include "rcas/random.hpp"
#include "rcas/search.hpp"
#include "rcas/synthetic.hpp"
