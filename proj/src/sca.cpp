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
#include "cfmimo/sca.hpp"

#include "cfmimo/conic/builders.hpp"
#include "cfmimo/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace cfmimo {

namespace {

conic::SolverOptions relaxed(conic::SolverOptions o)
{
    o.feas_tol *= 10.0;
    o.cone_tol *= 10.0;
    o.gap_abs_tol *= 10.0;
    o.gap_rel_tol *= 10.0;
    return o;
}

PowerAllocation to_allocation(const Matrix& c, const BoolMatrix* mask)
{
    return mask ? PowerAllocation::from_c(c, *mask) : PowerAllocation::from_c(c);
}

double residual_of(const conic::SolverResult& r, const conic::ConicProgram& prog)
{
    conic::Violation v = prog.violation(r.x);
    return std::max(v.linear, v.cone);
}

}  // namespace

const char* to_string(ScaStatus s)
{
    switch (s) {
        case ScaStatus::Converged: return "converged";
        case ScaStatus::IterationLimit: return "iteration_limit";
        case ScaStatus::Infeasible: return "infeasible";
        case ScaStatus::SolverFailure: return "solver_failure";
    }
    return "unknown";
}

Matrix clip_to_budget(const ChannelStats& stats, const Matrix& c)
{
    Matrix out = c;
    const double cap = 1.0 / stats.N;
    for (int m = 0; m < stats.M(); ++m) {
        CompensatedSum s;
        for (int k = 0; k < stats.K(); ++k) s.add(stats.gamma(m, k) * c(m, k) * c(m, k));
        if (s.value() > cap) out.row(m) *= std::sqrt(cap / s.value());
    }
    return out;
}

double min_se_margin(const ChannelStats& stats, const Matrix& c, const std::vector<double>& targets)
{
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < stats.K(); ++k) {
        worst = std::min(worst, se_from_sinr(stats, sinr_k_c(stats, c, k)) - targets[k]);
    }
    return worst;
}

ScaInit initialize(const ChannelStats& stats, const std::vector<double>& targets,
                   const BoolMatrix* mask, const ScaOptions& opts)
{
    ScaInit init;
    conic::FeasibilityProgram fp = conic::build_feasibility(stats, targets, mask);
    conic::SolverResult r = conic::solve(fp.prog, opts.solver);
    if (r.status == conic::SolverStatus::NumericalFailure ||
        r.status == conic::SolverStatus::MaxIterations) {
        r = conic::solve(fp.prog, relaxed(opts.solver));
    }
    if (r.status == conic::SolverStatus::Infeasible) {
        init.detail = "QoS targets infeasible";
        return init;
    }
    if (r.status != conic::SolverStatus::Optimal) {
        init.solver_failed = true;
        init.detail = std::string("feasibility solve: ") + conic::to_string(r.status) +
                      (r.detail.empty() ? "" : " (" + r.detail + ")");
        return init;
    }
    init.c = clip_to_budget(stats, conic::recover_feasibility_c(fp, r.x));
    init.u.resize(stats.K());
    for (int k = 0; k < stats.K(); ++k) init.u(k) = 1.0 + sinr_k_c(stats, init.c, k);
    init.feasible = true;
    return init;
}

PowerAllocation run(const ChannelStats& stats, const PowerParams& params,
                    const std::vector<double>& targets, ScaState& state, const ScaOptions& opts,
                    const BoolMatrix* mask)
{
    const int M = stats.M(), K = stats.K();
    state = ScaState{};
    ScaInit init = initialize(stats, targets, mask, opts);
    if (!init.feasible) {
        state.status = init.solver_failed ? ScaStatus::SolverFailure : ScaStatus::Infeasible;
        state.detail = init.detail;
        return PowerAllocation::infeasible_sentinel(M, K);
    }

    state.c = init.c;
    state.u = init.u;
    const double B = params.bandwidth_Hz;
    // Perspective point of the initial allocation: theta = 1/P, tdot = theta * t.
    Vector t(K), tdot(K);
    double theta = 1.0 / conic::fractional_denominator_W(stats, params, state.c);
    for (int k = 0; k < K; ++k) {
        t(k) = stats.prelog() * std::log2(state.u(k));
        tdot(k) = theta * t(k);
    }
    state.trace.push_back(
        {0, B * tdot.sum(), theta, 0.0, energy_efficiency(params, stats, to_allocation(state.c, mask))});

    state.status = ScaStatus::IterationLimit;
    for (int n = 1; n <= opts.max_iter; ++n) {
        conic::ScaSubproblem sp =
            conic::build_sca_subproblem(stats, params, state.c, state.u, targets, mask);
        conic::SolverResult r = conic::solve(sp.prog, opts.solver);
        if (r.status != conic::SolverStatus::Optimal && n == 1) {
            r = conic::solve(sp.prog, relaxed(opts.solver));
        }
        if (r.status != conic::SolverStatus::Optimal) {
            state.status = ScaStatus::SolverFailure;
            state.detail = "iteration " + std::to_string(n) + ": " + conic::to_string(r.status) +
                           (r.detail.empty() ? "" : " (" + r.detail + ")");
            break;
        }
        conic::ScaPoint pt = conic::recover_point(sp, r.x);
        Vector tdot_new = conic::scaled_t(sp, r.x);
        const Matrix clipped = clip_to_budget(stats, pt.c);
        const double prev_obj = state.trace.back().objective;
        if (r.objective < prev_obj - 1e-6 * std::fabs(prev_obj) ||
            min_se_margin(stats, clipped, targets) < -1e-6) {
            state.status = ScaStatus::SolverFailure;
            state.detail = "iteration " + std::to_string(n) + ": inaccurate subproblem solution";
            break;
        }

        double change = opts.unscaled_stop ? (pt.t - t).sum() : (tdot_new - tdot).sum();
        state.c = pt.c;
        state.u = pt.u;
        t = pt.t;
        tdot = tdot_new;
        state.iteration = n;
        state.trace.push_back({n, r.objective, pt.theta, residual_of(r, sp.prog),
                               energy_efficiency(params, stats, to_allocation(clipped, mask))});
        if (std::fabs(change) < opts.eps) {
            state.status = ScaStatus::Converged;
            break;
        }
    }
    state.c = clip_to_budget(stats, state.c);
    return to_allocation(state.c, mask);
}

void write_trace_csv(std::ostream& os, const ScaState& state)
{
    os << "iteration,objective_bit_per_J,theta_per_W,max_residual,ee_bit_per_J\n";
    for (const ScaTraceRow& row : state.trace) {
        os << row.iteration << ',' << format_double(row.objective) << ','
           << format_double(row.theta) << ',' << format_double(row.max_residual) << ','
           << format_double(row.ee) << '\n';
    }
}

}  // namespace cfmimo
