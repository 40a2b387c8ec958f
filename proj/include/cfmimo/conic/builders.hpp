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
 * @file builders.hpp
 * @brief Assembly of the QoS feasibility program and the per-iteration
 *        perspective-transformed SCA subproblem.
 *
 * Power variables are normalized amplitudes x_mk = sqrt(gamma_mk) c_mk, so
 * every entry lies in [0, 1/sqrt(N)] whatever the spread of the large-scale
 * gains. Both programs introduce one auxiliary r_m per AP with
 * ||(sqrt(gamma_mk) c_mk)_k|| <= r_m. Every beamforming-uncertainty sum
 * sum_k' ||D_k'k c_k'||^2 equals sum_m beta_mk * (sum_k' gamma_mk' c_mk'^2)
 * and is therefore written through the entries sqrt(beta_mk) r_m.
 *
 * In the SCA subproblem power is expressed in units of `power_unit_W`,
 * i.e. the program variable theta_hat equals power_unit_W * theta and the
 * dotted variables are scaled by theta_hat. The objective coefficients are
 * chosen so that the program objective equals B * sum_k tdot_k with the
 * physical (1/W) perspective variable.
 */
#ifndef CFMIMO_CONIC_BUILDERS_HPP
#define CFMIMO_CONIC_BUILDERS_HPP

#include "cfmimo/conic/program.hpp"
#include "cfmimo/powermodel.hpp"
#include "cfmimo/sefun.hpp"

#include <vector>

namespace cfmimo::conic {

using IndexMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;

/// SINR threshold 2^(So/prelog) - 1 equivalent to an SE target So.
double sinr_threshold(const ChannelStats& stats, double se_target);

struct FeasibilityProgram {
    ConicProgram prog;
    IndexMatrix c_index;       // -1 where the pair is not served
    std::vector<int> r_index;  // -1 for APs without served users
    Matrix amp;                // x_mk = amp_mk * c_mk
};

/// Variables c_mk >= 0 for served pairs, per-AP budget cones and one QoS
/// cone per user with a positive target; constant objective.
FeasibilityProgram build_feasibility(const ChannelStats& stats, const std::vector<double>& targets,
                                     const BoolMatrix* mask = nullptr);

Matrix recover_feasibility_c(const FeasibilityProgram& fp, const std::vector<double>& x);

/// Point in the physical units of the SCA subproblem.
struct ScaPoint {
    Matrix c;
    Vector u;
    Vector t;
    double theta = 0.0;  // 1/W
};

struct ScaSubproblem {
    ConicProgram prog;
    IndexMatrix c_index;
    std::vector<int> r_index;
    Matrix amp;
    std::vector<int> t_index;
    std::vector<int> u_index;
    int theta_index = -1;
    double power_unit_W = 1.0;
    Vector f_prev;  // f(c_prev, u_prev) per user
};

/// Denominator of the fractional objective: P_fix plus amplifier power (W).
double fractional_denominator_W(const ChannelStats& stats, const PowerParams& params,
                                const Matrix& c);

/// f(c,u) = (rho_d N^2 sum_k' |gbar_k'k' c_k'|^2 + rho_d N sum_k' ||D c_k'||^2 + 1) / u.
double f_value(const ChannelStats& stats, const Matrix& c, double u, int k);

/// First-order expansion of theta*f around (c_prev, u_prev) evaluated at a
/// perspective point (cdot, udot, theta), all in physical units.
double f_linearized(const ChannelStats& stats, const Matrix& c_prev, double u_prev,
                    const Matrix& cdot, double udot, double theta, int k);

/// power_unit_W <= 0 selects the fractional denominator at c_prev, so the
/// scaled anchor has theta_hat = 1.
ScaSubproblem build_sca_subproblem(const ChannelStats& stats, const PowerParams& params,
                                   const Matrix& c_prev, const Vector& u_prev,
                                   const std::vector<double>& targets,
                                   const BoolMatrix* mask = nullptr, double power_unit_W = 0.0);

/// Program vector for a physical point (r_m set tight).
std::vector<double> encode_point(const ScaSubproblem& sp, const ChannelStats& stats,
                                 const ScaPoint& pt);

/// Inverse of the perspective transform: c = cdot/theta, u = udot/theta, t = tdot/theta.
ScaPoint recover_point(const ScaSubproblem& sp, const std::vector<double>& x);

/// Physical tdot = theta * t per user from a program vector.
Vector scaled_t(const ScaSubproblem& sp, const std::vector<double>& x);

}  // namespace cfmimo::conic

#endif
