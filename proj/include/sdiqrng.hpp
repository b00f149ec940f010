// Copyright 2026 The sdiqrng Authors
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


#ifndef SDIQRNG_SDIQRNG_HPP
#define SDIQRNG_SDIQRNG_HPP

#include "sdiqrng/adversary.hpp"
#include "sdiqrng/bloch.hpp"
#include "sdiqrng/certify.hpp"
#include "sdiqrng/constraints.hpp"
#include "sdiqrng/errors.hpp"
#include "sdiqrng/estimation.hpp"
#include "sdiqrng/extraction.hpp"
#include "sdiqrng/oracle.hpp"
#include "sdiqrng/privacy.hpp"
#include "sdiqrng/protocol.hpp"
#include "sdiqrng/rng.hpp"
#include "sdiqrng/round_log_io.hpp"
#include "sdiqrng/types.hpp"

#endif
