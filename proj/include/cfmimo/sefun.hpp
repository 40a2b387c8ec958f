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
 * @file sefun.hpp
 * @brief Closed-form downlink SINR and spectral efficiency under
 *        conjugate beamforming.
 *
 * Allocations are held as eta (reporting variable); the evaluators work on
 * c = sqrt(eta), which is also what the optimizer manipulates.
 */
#ifndef CFMIMO_SEFUN_HPP
#define CFMIMO_SEFUN_HPP

#include "cfmimo/netmodel.hpp"

#include <iosfwd>
#include <vector>

namespace cfmimo {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct PowerAllocation {
    Matrix eta;
    BoolMatrix mask;
    /// Marks the sentinel returned for infeasible problems (EE reported as 0).
    bool infeasible = false;

    static PowerAllocation zeros(int M, int K);
    static PowerAllocation from_c(const Matrix& c);
    static PowerAllocation from_c(const Matrix& c, const BoolMatrix& mask);
    static PowerAllocation infeasible_sentinel(int M, int K);

    Matrix c() const;
    int M() const { return static_cast<int>(eta.rows()); }
    int K() const { return static_cast<int>(eta.cols()); }
    /// Largest sum_k eta*gamma - 1/N over APs (<= 0 when the AP budget holds).
    double max_ap_excess(const ChannelStats& stats) const;
};

struct PowerBreakdown {
    double amplifier_W = 0.0;
    double fixed_W = 0.0;
    double backhaul_traffic_W = 0.0;
    double total_W() const { return amplifier_W + fixed_W + backhaul_traffic_W; }
};

struct EvalReport {
    std::vector<double> se_per_user;
    std::vector<double> sinr_per_user;
    std::vector<double> contamination_term_per_user;
    double sum_se = 0.0;
    PowerBreakdown power_breakdown;
    double ee = 0.0;
};

/// Individual terms of one user's SINR. Terms already include rho_d and N.
struct SinrTerms {
    double desired = 0.0;
    double contamination = 0.0;
    double uncertainty = 0.0;
    double noise = 1.0;
    double sinr() const { return desired / (contamination + uncertainty + noise); }
};

/// Entry m: Phi[k'][k] * gamma_{mk'} * beta_mk / beta_{mk'}.
Vector barred_gamma(const ChannelStats& stats, int k_prime, int k);

SinrTerms sinr_terms_c(const ChannelStats& stats, const Matrix& c, int k);
double sinr_k_c(const ChannelStats& stats, const Matrix& c, int k);

double sinr_k(const ChannelStats& stats, const PowerAllocation& alloc, int k);
double se_from_sinr(const ChannelStats& stats, double sinr);
double se_k(const ChannelStats& stats, const PowerAllocation& alloc, int k);
double sum_se(const ChannelStats& stats, const PowerAllocation& alloc);

/// SE-only report; power fields are filled by powermodel::evaluate.
EvalReport evaluate_se(const ChannelStats& stats, const PowerAllocation& alloc);

/// Per-user CSV rows: user,se,sinr,contamination.
void write_report_csv(std::ostream& os, const EvalReport& r);
/// Single summary row with unit-labelled power columns.
void write_report_summary(std::ostream& os, const EvalReport& r);

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double v);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace cfmimo

#endif
