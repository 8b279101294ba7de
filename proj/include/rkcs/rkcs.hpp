// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rkcs/bounds.hpp"
#include "rkcs/config.hpp"
#include "rkcs/diagnostics.hpp"
#include "rkcs/dynamics.hpp"
#include "rkcs/ensemble.hpp"
#include "rkcs/errors.hpp"
#include "rkcs/kernel.hpp"
#include "rkcs/parallel.hpp"
#include "rkcs/relkin.hpp"
#include "rkcs/sampler.hpp"
#include "rkcs/series_io.hpp"
#include "rkcs/transport.hpp"
#include "rkcs/vecops.hpp"
#include "rkcs/verify.hpp"

namespace rkcs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rkcs
