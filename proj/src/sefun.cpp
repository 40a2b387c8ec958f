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
#include "cfmimo/sefun.hpp"
#include "cfmimo/serialize.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace cfmimo {

void CompensatedSum::add(double v)
{
    double t = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
        comp_ += (sum_ - t) + v;
    } else {
        comp_ += (v - t) + sum_;
    }
    sum_ = t;
}

PowerAllocation PowerAllocation::zeros(int M, int K)
{
    PowerAllocation a;
    a.eta = Matrix::Zero(M, K);
    a.mask = BoolMatrix::Constant(M, K, true);
    return a;
}

PowerAllocation PowerAllocation::from_c(const Matrix& c)
{
    return from_c(c, BoolMatrix::Constant(c.rows(), c.cols(), true));
}

PowerAllocation PowerAllocation::from_c(const Matrix& c, const BoolMatrix& mask)
{
    if (c.rows() != mask.rows() || c.cols() != mask.cols()) {
        throw std::invalid_argument("allocation and mask dimensions differ");
    }
    PowerAllocation a;
    a.mask = mask;
    a.eta = Matrix::Zero(c.rows(), c.cols());
    for (Eigen::Index m = 0; m < c.rows(); ++m) {
        for (Eigen::Index k = 0; k < c.cols(); ++k) {
            if (mask(m, k)) {
                double v = std::max(c(m, k), 0.0);
                a.eta(m, k) = v * v;
            }
        }
    }
    return a;
}

PowerAllocation PowerAllocation::infeasible_sentinel(int M, int K)
{
    PowerAllocation a = zeros(M, K);
    a.infeasible = true;
    return a;
}

Matrix PowerAllocation::c() const
{
    return eta.cwiseMax(0.0).cwiseSqrt();
}

double PowerAllocation::max_ap_excess(const ChannelStats& stats) const
{
    double worst = -1.0 / stats.N;
    for (int m = 0; m < M(); ++m) {
        CompensatedSum s;
        for (int k = 0; k < K(); ++k) s.add(eta(m, k) * stats.gamma(m, k));
        worst = std::max(worst, s.value() - 1.0 / stats.N);
    }
    return worst;
}

Vector barred_gamma(const ChannelStats& stats, int k_prime, int k)
{
    const int M = stats.M();
    Vector g(M);
    const double phi = stats.cross_gain(k_prime, k);
    for (int m = 0; m < M; ++m) {
        g(m) = phi == 0.0 ? 0.0
                          : phi * stats.gamma(m, k_prime) * (stats.beta(m, k) / stats.beta(m, k_prime));
    }
    return g;
}

SinrTerms sinr_terms_c(const ChannelStats& stats, const Matrix& c, int k)
{
    const int M = stats.M();
    const int K = stats.K();
    const double N = stats.N;
    SinrTerms t;
    CompensatedSum contamination, uncertainty;
    for (int kp = 0; kp < K; ++kp) {
        const double phi = stats.cross_gain(kp, k);
        if (phi != 0.0) {
            CompensatedSum inner;
            for (int m = 0; m < M; ++m) {
                double gb = phi * stats.gamma(m, kp) * (stats.beta(m, k) / stats.beta(m, kp));
                inner.add(gb * c(m, kp));
            }
            double v = stats.rho_d * N * N * inner.value() * inner.value();
            if (kp == k) {
                t.desired = v;
            } else {
                contamination.add(v);
            }
        }
        for (int m = 0; m < M; ++m) {
            uncertainty.add(stats.gamma(m, kp) * stats.beta(m, k) * c(m, kp) * c(m, kp));
        }
    }
    t.contamination = contamination.value();
    t.uncertainty = stats.rho_d * N * uncertainty.value();
    t.noise = 1.0;
    return t;
}

double sinr_k_c(const ChannelStats& stats, const Matrix& c, int k)
{
    return sinr_terms_c(stats, c, k).sinr();
}

double sinr_k(const ChannelStats& stats, const PowerAllocation& alloc, int k)
{
    return sinr_k_c(stats, alloc.c(), k);
}

double se_from_sinr(const ChannelStats& stats, double sinr)
{
    return stats.prelog() * std::log2(1.0 + sinr);
}

double se_k(const ChannelStats& stats, const PowerAllocation& alloc, int k)
{
    return se_from_sinr(stats, sinr_k(stats, alloc, k));
}

double sum_se(const ChannelStats& stats, const PowerAllocation& alloc)
{
    return evaluate_se(stats, alloc).sum_se;
}

EvalReport evaluate_se(const ChannelStats& stats, const PowerAllocation& alloc)
{
    const int K = stats.K();
    EvalReport r;
    r.se_per_user.assign(K, 0.0);
    r.sinr_per_user.assign(K, 0.0);
    r.contamination_term_per_user.assign(K, 0.0);
    if (alloc.infeasible) return r;
    const Matrix c = alloc.c();
    CompensatedSum total;
    for (int k = 0; k < K; ++k) {
        SinrTerms t = sinr_terms_c(stats, c, k);
        r.sinr_per_user[k] = t.sinr();
        r.contamination_term_per_user[k] = t.contamination;
        r.se_per_user[k] = se_from_sinr(stats, t.sinr());
        total.add(r.se_per_user[k]);
    }
    r.sum_se = total.value();
    return r;
}

void write_report_csv(std::ostream& os, const EvalReport& r)
{
    os << "user,se_bps_per_Hz,sinr,contamination\n";
    for (std::size_t k = 0; k < r.se_per_user.size(); ++k) {
        os << k << ',' << format_double(r.se_per_user[k]) << ','
           << format_double(r.sinr_per_user[k]) << ','
           << format_double(r.contamination_term_per_user[k]) << '\n';
    }
}

void write_report_summary(std::ostream& os, const EvalReport& r)
{
    os << "sum_se_bps_per_Hz,amplifier_W,fixed_W,backhaul_traffic_W,total_W,ee_bit_per_J\n";
    os << format_double(r.sum_se) << ',' << format_double(r.power_breakdown.amplifier_W) << ','
       << format_double(r.power_breakdown.fixed_W) << ','
       << format_double(r.power_breakdown.backhaul_traffic_W) << ','
       << format_double(r.power_breakdown.total_W()) << ',' << format_double(r.ee) << '\n';
}

}  // namespace cfmimo
