// SPDX-License-Identifier: Apache-2.0

#ifndef ALGDD_ALGDD_HPP
#define ALGDD_ALGDD_HPP

#include "coarse.hpp"
#include "core.hpp"
#include "dense.hpp"
#include "gmres.hpp"
#include "graph.hpp"
#include "lapack.hpp"
#include "matrix_market.hpp"
#include "partition.hpp"
#include "problems.hpp"
#include "run.hpp"
#include "schwarz.hpp"
#include "sparse.hpp"
#include "splitting.hpp"

#endif  // ALGDD_ALGDD_HPP
