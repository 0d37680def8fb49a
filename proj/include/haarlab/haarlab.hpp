// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "densities.hpp"
#include "ensembles.hpp"
#include "matrix.hpp"
#include "moments.hpp"
#include "quadrature.hpp"
#include "rational.hpp"
#include "rng.hpp"
#include "spectral.hpp"
#include "stats.hpp"
#include "verify.hpp"
