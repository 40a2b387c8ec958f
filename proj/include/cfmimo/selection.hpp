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
 * @file selection.hpp
 * @brief AP selection schemes and the fixed-power baselines.
 *
 * A selection fixes for every user k a serving set A_k of APs; the
 * optimizer then runs on gamma masked to the chosen pairs while the
 * evaluation bills backhaul traffic only for the users an AP serves.
 */
#ifndef CFMIMO_SELECTION_HPP
#define CFMIMO_SELECTION_HPP

#include "cfmimo/netmodel.hpp"
#include "cfmimo/powermodel.hpp"
#include "cfmimo/sca.hpp"
#include "cfmimo/sefun.hpp"

#include <iosfwd>
#include <vector>

namespace cfmimo {

struct SelectionResult {
    std::vector<std::vector<int>> serving_sets;  // A_k, ascending AP indices
    std::vector<std::vector<int>> served_users;  // U_m, ascending user indices
    Matrix gamma_hat;

    /// Builds U_m and gamma_hat from the serving sets.
    static SelectionResult from_serving_sets(const ChannelStats& stats,
                                             std::vector<std::vector<int>> sets);
    /// Everyone served by everyone.
    static SelectionResult full(const ChannelStats& stats);

    BoolMatrix mask() const;
    /// Mean |A_k| / M.
    double mean_fraction() const;
};

/// Rebuilds A_k from U_m.
std::vector<std::vector<int>> transpose_sets(const std::vector<std::vector<int>>& sets, int other);

/// p_mk = c_mk gamma_mk / sum_m' c_m'k gamma_m'k. Throws when a user
/// receives nothing.
Matrix contribution_fractions(const PowerAllocation& alloc, const ChannelStats& stats);

/// Smallest prefix of a descending ordering (ties by lower index) whose
/// shares reach delta_pct percent of the column total.
std::vector<int> smallest_prefix(const Vector& shares, double delta_pct);

SelectionResult select_received_power(const PowerAllocation& alloc_opt, const ChannelStats& stats,
                                      double delta_pct);

SelectionResult select_largest_beta(const ChannelStats& stats, double delta_pct);

enum class SelectionScheme { ReceivedPower, LargestBeta };

const char* to_string(SelectionScheme s);

struct SelectionOutcome {
    PowerAllocation alloc;
    SelectionResult selection;
    EvalReport report;
    ScaState state;
    /// Unmasked optimization used by the received-power scheme.
    PowerAllocation initial_alloc;
    ScaState initial_state;
};

/// Received-power selection runs the unmasked optimizer first to rank APs.
/// Users with no received power in that solution fall back to their
/// largest-beta set.
SelectionOutcome optimize_with_selection(const ChannelStats& stats, const PowerParams& params,
                                         const std::vector<double>& targets,
                                         SelectionScheme scheme, double delta_pct,
                                         const ScaOptions& opts = {});

enum class EqualPowerScheme { I, II };

/// I: eta_mk = 1/(N K gamma_mk). II: eta_mk = 1/(N sum_k' gamma_mk').
PowerAllocation equal_power(const ChannelStats& stats, EqualPowerScheme scheme);

/// Single AP at the area center with all M*N antennas.
SystemConfig colocated_config(const SystemConfig& cfg);

/// "cfmimo-serving-sets 1", then "M K", then one line "k n m_1 .. m_n" per user.
void write_serving_sets(std::ostream& os, const SelectionResult& sel);
std::vector<std::vector<int>> read_serving_sets(std::istream& is, int& M);

}  // namespace cfmimo

#endif
