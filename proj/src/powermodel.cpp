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
#include "cfmimo/powermodel.hpp"

#include <stdexcept>
#include <string>

namespace cfmimo {

PowerParams PowerParams::uniform(int M, const SystemConfig& cfg, double alpha, double p_tc_W,
                                 double p_0_W, double p_bt_W_per_Gbps)
{
    PowerParams p;
    p.alpha = Vector::Constant(M, alpha);
    p.p_tc = Vector::Constant(M, p_tc_W);
    p.p_0 = Vector::Constant(M, p_0_W);
    p.p_bt = Vector::Constant(M, p_bt_W_per_Gbps * 1e-9);
    p.bandwidth_Hz = cfg.bandwidth_Hz;
    p.n0_W = cfg.noise_power_W();
    return p;
}

PowerParams PowerParams::defaults(int M, const SystemConfig& cfg)
{
    return uniform(M, cfg, 0.4, 0.2, 0.825, 0.25);
}

void PowerParams::validate(int M) const
{
    auto check = [M](const Vector& v, const char* name) {
        if (v.size() != M) {
            throw std::invalid_argument(std::string("power.") + name + ": expected one entry per AP");
        }
        if ((v.array() < 0.0).any()) {
            throw std::invalid_argument(std::string("power.") + name + ": must be >= 0");
        }
    };
    check(alpha, "alpha");
    check(p_tc, "p_tc");
    check(p_0, "p_0");
    check(p_bt, "p_bt");
    if ((alpha.array() <= 0.0).any() || (alpha.array() > 1.0).any()) {
        throw std::invalid_argument("power.alpha: must lie in (0,1]");
    }
    if (bandwidth_Hz <= 0.0 || n0_W <= 0.0) {
        throw std::invalid_argument("power.bandwidth_Hz/n0_W: must be > 0");
    }
}

double PowerParams::fixed_power_W(int N) const
{
    return N * p_tc.sum() + p_0.sum();
}

double amplifier_power_W(const PowerParams& params, const ChannelStats& stats,
                         const PowerAllocation& alloc)
{
    if (alloc.infeasible) return 0.0;
    CompensatedSum acc;
    for (int m = 0; m < stats.M(); ++m) {
        CompensatedSum ap;
        for (int k = 0; k < stats.K(); ++k) ap.add(alloc.eta(m, k) * stats.gamma(m, k));
        acc.add(ap.value() / params.alpha(m));
    }
    return stats.rho_d * params.n0_W * stats.N * acc.value();
}

PowerBreakdown total_power(const PowerParams& params, const ChannelStats& stats,
                           const PowerAllocation& alloc, const EvalReport& report)
{
    PowerBreakdown b;
    b.amplifier_W = amplifier_power_W(params, stats, alloc);
    b.fixed_W = params.fixed_power_W(stats.N);
    CompensatedSum traffic;
    for (int m = 0; m < stats.M(); ++m) {
        CompensatedSum served;
        for (int k = 0; k < stats.K(); ++k) {
            if (alloc.mask(m, k)) served.add(report.se_per_user[k]);
        }
        traffic.add(params.p_bt(m) * served.value());
    }
    b.backhaul_traffic_W = params.bandwidth_Hz * traffic.value();
    return b;
}

EvalReport evaluate(const ChannelStats& stats, const PowerParams& params,
                    const PowerAllocation& alloc)
{
    EvalReport r = evaluate_se(stats, alloc);
    r.power_breakdown = total_power(params, stats, alloc, r);
    r.ee = alloc.infeasible ? 0.0 : params.bandwidth_Hz * r.sum_se / r.power_breakdown.total_W();
    return r;
}

double energy_efficiency(const PowerParams& params, const ChannelStats& stats,
                         const PowerAllocation& alloc)
{
    return evaluate(stats, params, alloc).ee;
}

double q_objective(const PowerParams& params, const ChannelStats& stats,
                   const PowerAllocation& alloc)
{
    if (alloc.infeasible) return 0.0;
    double se = sum_se(stats, alloc);
    double denom = params.fixed_power_W(stats.N) + amplifier_power_W(params, stats, alloc);
    return params.bandwidth_Hz * se / denom;
}

}  // namespace cfmimo
