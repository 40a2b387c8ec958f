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
 * @file oracle.hpp
 * @brief Independent checks: Monte Carlo simulation of the downlink with
 *        conjugate beamforming, and exhaustive grid search of the EE on tiny
 *        instances.
 *
 * The simulator draws small-scale fading, uplink pilots with fresh noise
 * and MMSE estimates each sample, then measures the desired-signal mean and
 * the beamforming-uncertainty and inter-user interference powers directly.
 * Pilots are columns of the identity codebook, so the noise projected on a
 * pilot is shared by every user holding that pilot at a given AP.
 */
#ifndef CFMIMO_ORACLE_HPP
#define CFMIMO_ORACLE_HPP

#include "cfmimo/netmodel.hpp"
#include "cfmimo/powermodel.hpp"
#include "cfmimo/sefun.hpp"

#include <vector>

namespace cfmimo {

struct McEstimate {
    long samples = 0;
    /// |E{DS_k}|, the magnitude of the mean desired-signal gain.
    Vector ds;
    Vector ds_se;
    /// E{|BU_k|^2}
    Vector bu_power;
    Vector bu_se;
    /// (k, k'): E{|UI_kk'|^2}; the diagonal is unused and left at 0.
    Matrix ui_power;
    Matrix ui_se;
    /// Ratio of the estimated moments per user.
    Vector sinr;
    /// Sample mean of ||ghat_mk||^4 / gamma_mk^2 and its standard error.
    Matrix ghat4_ratio;
    Matrix ghat4_se;
};

McEstimate mc_sinr(const LargeScaleRealization& real, const PilotAssignment& pilots,
                   const SystemConfig& cfg, const PowerAllocation& alloc, long samples, Rng& rng);

/// Random feasible allocation: per AP a uniform fill level in (0.5, 1] of
/// the budget split over users by normalized uniform weights.
PowerAllocation random_allocation(const ChannelStats& stats, Rng& rng);

/// Closed-form counterparts of the simulated moments.
Vector closed_form_bu(const ChannelStats& stats, const PowerAllocation& alloc);
Matrix closed_form_ui(const ChannelStats& stats, const PowerAllocation& alloc);

struct GridResult {
    bool feasible = false;
    double ee = 0.0;
    PowerAllocation alloc;
    long evaluated = 0;
};

/// Scans eta_mk gamma_mk over multiples of step/N with every per-AP budget
/// respected and returns the best EE among points meeting the targets.
/// Rejects instances with M*K > 6.
GridResult grid_search_ee(const ChannelStats& stats, const PowerParams& params,
                          const std::vector<double>& targets, double step = 0.01);

}  // namespace cfmimo

#endif
