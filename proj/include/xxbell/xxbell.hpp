/*
   Copyright 2026 The xxbell Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include "xxbell/analysis.hpp"
#include "xxbell/config.hpp"
#include "xxbell/correlators.hpp"
#include "xxbell/ensemble.hpp"
#include "xxbell/error.hpp"
#include "xxbell/freefermion.hpp"
#include "xxbell/linalg.hpp"
#include "xxbell/measures.hpp"
#include "xxbell/model.hpp"
#include "xxbell/oracle.hpp"
#include "xxbell/verify.hpp"

namespace xxbell {

inline constexpr const char* version = "0.1.0";

}  // namespace xxbell
