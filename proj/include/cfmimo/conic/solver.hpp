// SPDX-License-Identifier: Apache-2.0
//
// cfmimo: cell-free massive MIMO power control and AP selection toolkit
// Copyright (C) 2026 The cfmimo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
/**
 * @file solver.hpp
 * @brief Primal-dual interior-point solver for second-order cone programs.
 *
 * Homogeneous self-dual embedding with Nesterov-Todd scaling and a Mehrotra
 * predictor-corrector. Newton systems are solved through a sparse
 * quasi-definite KKT system in which every second-order cone contributes two
 * lifted columns, so dense cone blocks never appear.
 *
 * Residuals are relative and measured on the equilibrated program:
 *   primal = max(||Ax-b|| / max(1,||b||+||x||), ||Gx+s-h|| / max(1,||h||+||x||+||s||))
 *   cone   = violation of h-Gx in the cone / max(1,||h||+||x||+||s||)
 */
#ifndef CFMIMO_CONIC_SOLVER_HPP
#define CFMIMO_CONIC_SOLVER_HPP

#include "cfmimo/conic/program.hpp"

#include <string>
#include <vector>

namespace cfmimo::conic {

enum class SolverStatus { Optimal, Infeasible, MaxIterations, NumericalFailure };

const char* to_string(SolverStatus s);

struct SolverOptions {
    double feas_tol = 1e-8;
    double cone_tol = 1e-8;
    double gap_abs_tol = 1e-8;
    double gap_rel_tol = 1e-8;
    int max_iters = 100;
    int equilibration_passes = 15;
    bool verbose = false;
};

struct SolverResult {
    SolverStatus status = SolverStatus::NumericalFailure;
    std::vector<double> x;
    double objective = 0.0;
    double primal_residual = 0.0;
    double cone_residual = 0.0;
    double dual_residual = 0.0;
    double gap = 0.0;
    int iterations = 0;
    std::string detail;
};

SolverResult solve(const ConicProgram& prog, const SolverOptions& opts);
SolverResult solve(const ConicProgram& prog, double feas_tol = 1e-8, double cone_tol = 1e-8,
                   int max_iters = 100);

}  // namespace cfmimo::conic

#endif
