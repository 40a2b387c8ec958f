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
 * @file sca.hpp
 * @brief Successive convex approximation for total energy efficiency.
 *
 * Each iteration solves the perspective-transformed SOCP anchored at the
 * previous iterate (c, u) and moves the anchor to the recovered solution.
 * The previous iterate stays feasible for the next subproblem, so the trace
 * of B * sum_k tdot_k never decreases up to solver accuracy.
 */
#ifndef CFMIMO_SCA_HPP
#define CFMIMO_SCA_HPP

#include "cfmimo/conic/solver.hpp"
#include "cfmimo/powermodel.hpp"
#include "cfmimo/sefun.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cfmimo {

enum class ScaStatus {
    Converged,       // stop criterion fired
    IterationLimit,  // max_iter subproblems solved without firing
    Infeasible,      // the QoS targets cannot be met
    SolverFailure,   // a subproblem failed; see ScaState::detail
};

const char* to_string(ScaStatus s);

struct ScaOptions {
    double eps = 0.01;
    int max_iter = 10;
    /// Compare the unscaled sum of t instead of the perspective-scaled tdot.
    bool unscaled_stop = false;
    conic::SolverOptions solver;
};

struct ScaTraceRow {
    int iteration = 0;
    double objective = 0.0;  // B * sum_k tdot_k (bit/J)
    double theta = 0.0;      // 1/W
    double max_residual = 0.0;
    double ee = 0.0;         // total EE of the recovered allocation (bit/J)
};

struct ScaState {
    int iteration = 0;  // subproblems solved
    Matrix c;
    Vector u;
    std::vector<ScaTraceRow> trace;
    ScaStatus status = ScaStatus::SolverFailure;
    std::string detail;

    /// True when the returned allocation is usable (possibly after an early
    /// solver failure past the first iteration).
    bool has_allocation() const { return status != ScaStatus::Infeasible && c.size() > 0; }
};

struct ScaInit {
    bool feasible = false;
    bool solver_failed = false;
    Matrix c;
    Vector u;
    std::string detail;
};

/// Feasibility solve for the QoS targets; u = 1 + SINR(c) at the result.
ScaInit initialize(const ChannelStats& stats, const std::vector<double>& targets,
                   const BoolMatrix* mask = nullptr, const ScaOptions& opts = {});

/// Runs the full iteration. The allocation is the infeasible sentinel when
/// the targets cannot be met; otherwise it is clipped so every per-AP budget
/// holds exactly.
PowerAllocation run(const ChannelStats& stats, const PowerParams& params,
                    const std::vector<double>& targets, ScaState& state,
                    const ScaOptions& opts = {}, const BoolMatrix* mask = nullptr);

/// Scales each AP row down so sum_k gamma_mk c_mk^2 <= 1/N.
Matrix clip_to_budget(const ChannelStats& stats, const Matrix& c);

/// Smallest se_k - target_k over users.
double min_se_margin(const ChannelStats& stats, const Matrix& c, const std::vector<double>& targets);

/// Columns: iteration,objective_bit_per_J,theta_per_W,max_residual,ee_bit_per_J.
void write_trace_csv(std::ostream& os, const ScaState& state);

}  // namespace cfmimo

#endif
