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
 * @file powermodel.hpp
 * @brief Total power consumption and energy efficiency.
 */
#ifndef CFMIMO_POWERMODEL_HPP
#define CFMIMO_POWERMODEL_HPP

#include "cfmimo/sefun.hpp"

namespace cfmimo {

struct PowerParams {
    Vector alpha;  // amplifier efficiency per AP
    Vector p_tc;   // per-antenna circuit power (W)
    Vector p_0;    // fixed backhaul power (W)
    Vector p_bt;   // traffic-dependent backhaul power (W per bit/s)
    double bandwidth_Hz = 20e6;
    double n0_W = 0.0;

    /// Uniform parameters: alpha=0.4, P_tc=0.2 W, P_0=0.825 W, P_bt=0.25 W/(Gbit/s).
    static PowerParams defaults(int M, const SystemConfig& cfg);
    static PowerParams uniform(int M, const SystemConfig& cfg, double alpha, double p_tc_W,
                               double p_0_W, double p_bt_W_per_Gbps);
    void validate(int M) const;

    /// P_fix: sum_m (N*P_tc,m + P_0,m).
    double fixed_power_W(int N) const;
    double sum_p_bt() const { return p_bt.sum(); }
};

/// Breakdown for a given SE report; backhaul traffic follows the served sets.
PowerBreakdown total_power(const PowerParams& params, const ChannelStats& stats,
                           const PowerAllocation& alloc, const EvalReport& report);

/// Amplifier term rho_d*N0*N*sum_m (1/alpha_m) sum_k eta*gamma (W).
double amplifier_power_W(const PowerParams& params, const ChannelStats& stats,
                         const PowerAllocation& alloc);

/// Full SE and power report including EE.
EvalReport evaluate(const ChannelStats& stats, const PowerParams& params,
                    const PowerAllocation& alloc);

double energy_efficiency(const PowerParams& params, const ChannelStats& stats,
                         const PowerAllocation& alloc);

double q_objective(const PowerParams& params, const ChannelStats& stats,
                   const PowerAllocation& alloc);

}  // namespace cfmimo

#endif
