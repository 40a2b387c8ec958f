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
#include "cfmimo/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

namespace cfmimo {

namespace {

using cplx = std::complex<double>;

// Mean and standard error of the mean from running sums.
struct Moments {
    double sum = 0.0;
    double sq = 0.0;

    void add(double v)
    {
        sum += v;
        sq += v * v;
    }
    double mean(long n) const { return sum / static_cast<double>(n); }
    double se(long n) const
    {
        if (n < 2) return 0.0;
        const double m = mean(n);
        const double var = std::max(0.0, (sq - n * m * m) / static_cast<double>(n - 1));
        return std::sqrt(var / static_cast<double>(n));
    }
};

}  // namespace

McEstimate mc_sinr(const LargeScaleRealization& real, const PilotAssignment& pilots,
                   const SystemConfig& cfg, const PowerAllocation& alloc, long samples, Rng& rng)
{
    const Matrix& beta = real.beta;
    const int M = static_cast<int>(beta.rows()), K = static_cast<int>(beta.cols());
    const int N = cfg.N;
    if (samples < 2) throw std::invalid_argument("mc_sinr: samples must be >= 2");
    if (alloc.M() != M || alloc.K() != K) throw std::invalid_argument("mc_sinr: dimension mismatch");
    if (static_cast<int>(pilots.pilot_index.size()) != K) {
        throw std::invalid_argument("mc_sinr: pilot assignment does not match K");
    }
    const double rho_d = cfg.rho_d();
    const double a = std::sqrt(cfg.tau_p * cfg.rho_p());
    const int tau = cfg.tau_p;
    const std::vector<int>& pil = pilots.pilot_index;

    // MMSE scaling of the projected pilot signal and the resulting gamma.
    Matrix est(M, K), gamma(M, K), sqrt_beta = beta.cwiseSqrt();
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < K; ++k) {
            double load = 0.0;
            for (int kp = 0; kp < K; ++kp) {
                if (pil[kp] == pil[k]) load += beta(m, kp);
            }
            est(m, k) = a * beta(m, k) / (a * a * load + 1.0);
            gamma(m, k) = a * beta(m, k) * est(m, k);
        }
    }
    const Matrix c = alloc.c();

    std::normal_distribution<double> half(0.0, std::sqrt(0.5));
    auto draw = [&]() { return cplx(half(rng), half(rng)); };

    std::vector<cplx> g(static_cast<std::size_t>(M) * K * N), ghat(g.size());
    std::vector<cplx> noise(static_cast<std::size_t>(M) * tau * N), y(N);
    std::vector<cplx> diag(static_cast<std::size_t>(K) * samples);
    std::vector<Moments> ui(static_cast<std::size_t>(K) * K), g4(static_cast<std::size_t>(M) * K);
    auto at = [&](int m, int k) { return (static_cast<std::size_t>(m) * K + k) * N; };

    for (long s = 0; s < samples; ++s) {
        for (int m = 0; m < M; ++m) {
            for (int k = 0; k < K; ++k) {
                for (int n = 0; n < N; ++n) g[at(m, k) + n] = sqrt_beta(m, k) * draw();
            }
            for (int p = 0; p < tau; ++p) {
                for (int n = 0; n < N; ++n) noise[(static_cast<std::size_t>(m) * tau + p) * N + n] = draw();
            }
        }
        for (int m = 0; m < M; ++m) {
            for (int k = 0; k < K; ++k) {
                const cplx* w = &noise[(static_cast<std::size_t>(m) * tau + pil[k]) * N];
                for (int n = 0; n < N; ++n) y[n] = w[n];
                for (int kp = 0; kp < K; ++kp) {
                    if (pil[kp] != pil[k]) continue;
                    for (int n = 0; n < N; ++n) y[n] += a * g[at(m, kp) + n];
                }
                double norm2 = 0.0;
                for (int n = 0; n < N; ++n) {
                    ghat[at(m, k) + n] = est(m, k) * y[n];
                    norm2 += std::norm(ghat[at(m, k) + n]);
                }
                if (gamma(m, k) > 0.0) g4[m * K + k].add(norm2 * norm2 / (gamma(m, k) * gamma(m, k)));
            }
        }
        for (int k = 0; k < K; ++k) {
            for (int kp = 0; kp < K; ++kp) {
                cplx acc = 0.0;
                for (int m = 0; m < M; ++m) {
                    if (c(m, kp) == 0.0) continue;
                    cplx dot = 0.0;
                    for (int n = 0; n < N; ++n) dot += g[at(m, k) + n] * std::conj(ghat[at(m, kp) + n]);
                    acc += c(m, kp) * dot;
                }
                if (kp == k) {
                    diag[static_cast<std::size_t>(k) * samples + s] = acc;
                } else {
                    ui[k * K + kp].add(rho_d * std::norm(acc));
                }
            }
        }
    }

    McEstimate e;
    e.samples = samples;
    e.ds = e.ds_se = e.bu_power = e.bu_se = e.sinr = Vector::Zero(K);
    e.ui_power = e.ui_se = Matrix::Zero(K, K);
    e.ghat4_ratio = e.ghat4_se = Matrix::Zero(M, K);
    const double n = static_cast<double>(samples);
    for (int k = 0; k < K; ++k) {
        const cplx* d = &diag[static_cast<std::size_t>(k) * samples];
        cplx mean = 0.0;
        for (long s = 0; s < samples; ++s) mean += d[s];
        mean /= n;
        Moments dev;
        for (long s = 0; s < samples; ++s) dev.add(rho_d * std::norm(d[s] - mean));
        e.ds(k) = std::sqrt(rho_d) * std::abs(mean);
        // Spread of a complex mean: sqrt(E|d - mean|^2 / n).
        e.ds_se(k) = std::sqrt(dev.mean(samples) / n);
        e.bu_power(k) = dev.sum / (n - 1.0);
        e.bu_se(k) = dev.se(samples);
        double interference = 0.0;
        for (int kp = 0; kp < K; ++kp) {
            if (kp == k) continue;
            e.ui_power(k, kp) = ui[k * K + kp].mean(samples);
            e.ui_se(k, kp) = ui[k * K + kp].se(samples);
            interference += e.ui_power(k, kp);
        }
        e.sinr(k) = e.ds(k) * e.ds(k) / (e.bu_power(k) + interference + 1.0);
    }
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < K; ++k) {
            e.ghat4_ratio(m, k) = g4[m * K + k].mean(samples);
            e.ghat4_se(m, k) = g4[m * K + k].se(samples);
        }
    }
    return e;
}

PowerAllocation random_allocation(const ChannelStats& stats, Rng& rng)
{
    const int M = stats.M(), K = stats.K();
    std::uniform_real_distribution<double> fill(0.5, 1.0), weight(0.0, 1.0);
    PowerAllocation a = PowerAllocation::zeros(M, K);
    std::vector<double> w(K);
    for (int m = 0; m < M; ++m) {
        const double level = fill(rng);
        double total = 0.0;
        for (int k = 0; k < K; ++k) {
            w[k] = stats.gamma(m, k) > 0.0 ? weight(rng) : 0.0;
            total += w[k];
        }
        if (!(total > 0.0)) continue;
        for (int k = 0; k < K; ++k) {
            if (w[k] > 0.0) a.eta(m, k) = level * w[k] / (total * stats.N * stats.gamma(m, k));
        }
    }
    return a;
}

Vector closed_form_bu(const ChannelStats& stats, const PowerAllocation& alloc)
{
    Vector out(stats.K());
    for (int k = 0; k < stats.K(); ++k) {
        CompensatedSum s;
        for (int m = 0; m < stats.M(); ++m) s.add(alloc.eta(m, k) * stats.gamma(m, k) * stats.beta(m, k));
        out(k) = stats.rho_d * stats.N * s.value();
    }
    return out;
}

Matrix closed_form_ui(const ChannelStats& stats, const PowerAllocation& alloc)
{
    const int M = stats.M(), K = stats.K();
    const double N = stats.N;
    const Matrix c = alloc.c();
    Matrix out = Matrix::Zero(K, K);
    for (int k = 0; k < K; ++k) {
        for (int kp = 0; kp < K; ++kp) {
            if (kp == k) continue;
            CompensatedSum coherent, spread;
            for (int m = 0; m < M; ++m) {
                coherent.add(c(m, kp) * stats.gamma(m, kp) * stats.beta(m, k) / stats.beta(m, kp));
                spread.add(alloc.eta(m, kp) * stats.gamma(m, kp) * stats.beta(m, k));
            }
            const double phi = stats.cross_gain(k, kp);
            out(k, kp) = stats.rho_d * (phi * phi * N * N * coherent.value() * coherent.value() +
                                        N * spread.value());
        }
    }
    return out;
}

GridResult grid_search_ee(const ChannelStats& stats, const PowerParams& params,
                          const std::vector<double>& targets, double step)
{
    const int M = stats.M(), K = stats.K();
    if (M * K > 6) throw std::invalid_argument("grid_search_ee: M*K must be <= 6");
    if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("grid_search_ee: step must be in (0, 1]");
    if (static_cast<int>(targets.size()) != K) {
        throw std::invalid_argument("grid_search_ee: expected one target per user");
    }
    const int S = static_cast<int>(std::floor(1.0 / step + 1e-9));
    const double N = stats.N;

    // Per-AP grid: integer vectors with sum <= S, skipping unusable pairs.
    std::vector<std::vector<int>> ap_points;
    {
        std::vector<int> v(K, 0);
        auto rec = [&](auto&& self, int k, int left) -> void {
            if (k == K) {
                ap_points.push_back(v);
                return;
            }
            for (int q = 0; q <= left; ++q) {
                v[k] = q;
                self(self, k + 1, left - q);
            }
            v[k] = 0;
        };
        rec(rec, 0, S);
    }

    // Precomputed pieces of the SINR in terms of c.
    std::vector<double> gb(static_cast<std::size_t>(K) * K * M), un(static_cast<std::size_t>(K) * K * M);
    for (int k = 0; k < K; ++k) {
        for (int kp = 0; kp < K; ++kp) {
            for (int m = 0; m < M; ++m) {
                const std::size_t i = (static_cast<std::size_t>(k) * K + kp) * M + m;
                gb[i] = stats.cross_gain(kp, k) * stats.gamma(m, kp) * stats.beta(m, k) / stats.beta(m, kp);
                un[i] = stats.gamma(m, kp) * stats.beta(m, k);
            }
        }
    }
    const double B = params.bandwidth_Hz;
    const double rho_d_W = stats.rho_d * params.n0_W;
    const double p_fix = params.fixed_power_W(stats.N);
    const double p_bt = params.sum_p_bt();

    GridResult best;
    std::vector<int> choice(M, 0);
    Matrix c(M, K), eta(M, K);
    std::vector<double> se(K);
    while (true) {
        bool usable = true;
        for (int m = 0; m < M && usable; ++m) {
            for (int k = 0; k < K; ++k) {
                const int q = ap_points[choice[m]][k];
                if (q > 0 && !(stats.gamma(m, k) > 0.0)) {
                    usable = false;
                    break;
                }
                eta(m, k) = q > 0 ? q * step / (N * stats.gamma(m, k)) : 0.0;
                c(m, k) = std::sqrt(eta(m, k));
            }
        }
        if (usable) {
            ++best.evaluated;
            bool ok = true;
            double sum_se = 0.0;
            for (int k = 0; k < K && ok; ++k) {
                double desired = 0.0, contamination = 0.0, uncertainty = 0.0;
                for (int kp = 0; kp < K; ++kp) {
                    const std::size_t base = (static_cast<std::size_t>(k) * K + kp) * M;
                    double inner = 0.0;
                    for (int m = 0; m < M; ++m) {
                        inner += gb[base + m] * c(m, kp);
                        uncertainty += un[base + m] * eta(m, kp);
                    }
                    (kp == k ? desired : contamination) += inner * inner;
                }
                const double sinr = stats.rho_d * N * N * desired /
                                    (stats.rho_d * N * N * contamination + stats.rho_d * N * uncertainty + 1.0);
                se[k] = se_from_sinr(stats, sinr);
                ok = se[k] >= targets[k] - 1e-12;
                sum_se += se[k];
            }
            if (ok) {
                double amp = 0.0;
                for (int m = 0; m < M; ++m) {
                    double s = 0.0;
                    for (int k = 0; k < K; ++k) s += eta(m, k) * stats.gamma(m, k);
                    amp += s / params.alpha(m);
                }
                const double ee = B * sum_se / (p_fix + rho_d_W * N * amp + B * p_bt * sum_se);
                if (!best.feasible || ee > best.ee) {
                    best.feasible = true;
                    best.ee = ee;
                    best.alloc = PowerAllocation::zeros(M, K);
                    best.alloc.eta = eta;
                }
            }
        }
        int m = 0;
        while (m < M && ++choice[m] == static_cast<int>(ap_points.size())) choice[m++] = 0;
        if (m == M) break;
    }
    if (!best.feasible) best.alloc = PowerAllocation::infeasible_sentinel(M, K);
    return best;
}

}  // namespace cfmimo
