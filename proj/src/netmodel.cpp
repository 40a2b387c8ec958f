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
#include "cfmimo/netmodel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cfmimo {

namespace {

void require(bool ok, const char* field, const char* what)
{
    if (!ok) {
        throw std::invalid_argument(std::string("system.") + field + ": " + what);
    }
}

}  // namespace

void SystemConfig::validate() const
{
    require(M >= 1, "M", "must be >= 1");
    require(K >= 1, "K", "must be >= 1");
    require(N >= 1, "N", "must be >= 1");
    require(tau_p > 0, "tau_p", "must be > 0");
    require(tau_p < tau_c, "tau_p", "must be < tau_c");
    require(D_km > 0.0, "D_km", "must be > 0");
    require(rho_d_W > 0.0, "rho_d_W", "must be > 0");
    require(rho_p_W > 0.0, "rho_p_W", "must be > 0");
    require(bandwidth_Hz > 0.0, "bandwidth_Hz", "must be > 0");
    require(sigma_sh_dB >= 0.0, "sigma_sh_dB", "must be >= 0");
    require(d0_km > 0.0, "d0_km", "must be > 0");
    require(d0_km < d1_km, "d0_km", "must be < d1_km");
}

double SystemConfig::noise_power_W() const
{
    double dBm = -174.0 + 10.0 * std::log10(bandwidth_Hz) + noise_figure_dB;
    return std::pow(10.0, (dBm - 30.0) / 10.0);
}

Rng make_stream(std::uint64_t seed, std::uint64_t realization, Stream stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(realization),
                      static_cast<std::uint32_t>(realization >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

double torus_distance(const Point2& a, const Point2& b, double side)
{
    double dx = std::fabs(a.x - b.x);
    double dy = std::fabs(a.y - b.y);
    dx = std::min(dx, side - dx);
    dy = std::min(dy, side - dy);
    return std::hypot(dx, dy);
}

double path_loss_dB(double d_km, const SystemConfig& cfg)
{
    if (d_km > cfg.d1_km) {
        return -cfg.L_dB - 35.0 * std::log10(d_km);
    }
    double base = -cfg.L_dB - 15.0 * std::log10(cfg.d1_km);
    if (d_km > cfg.d0_km) {
        return base - 20.0 * std::log10(d_km);
    }
    return base - 20.0 * std::log10(cfg.d0_km);
}

static std::vector<Point2> uniform_points(int count, double side, Rng& rng)
{
    std::uniform_real_distribution<double> u(0.0, side);
    std::vector<Point2> pts(count);
    for (auto& p : pts) {
        p.x = u(rng);
        p.y = u(rng);
    }
    return pts;
}

Matrix shadowed_gains(const SystemConfig& cfg, const std::vector<Point2>& aps,
                      const std::vector<Point2>& users, Rng& shadow_rng)
{
    const int M = static_cast<int>(aps.size());
    const int K = static_cast<int>(users.size());
    Matrix beta(M, K);
    std::normal_distribution<double> shadow(0.0, 1.0);
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < K; ++k) {
            double d = torus_distance(aps[m], users[k], cfg.D_km);
            double sh = cfg.sigma_sh_dB * shadow(shadow_rng);
            beta(m, k) = std::pow(10.0, (path_loss_dB(d, cfg) + sh) / 10.0);
        }
    }
    return beta;
}

LargeScaleRealization generate_realization(const SystemConfig& cfg, Rng& ap_rng, Rng& user_rng,
                                           Rng& shadow_rng)
{
    cfg.validate();
    LargeScaleRealization r;
    if (cfg.ap_layout == ApLayout::Center) {
        r.ap_positions.assign(cfg.M, Point2{cfg.D_km / 2.0, cfg.D_km / 2.0});
    } else {
        r.ap_positions = uniform_points(cfg.M, cfg.D_km, ap_rng);
    }
    r.user_positions = uniform_points(cfg.K, cfg.D_km, user_rng);
    r.beta = shadowed_gains(cfg, r.ap_positions, r.user_positions, shadow_rng);
    return r;
}

LargeScaleRealization generate_realization(const SystemConfig& cfg, std::uint64_t realization)
{
    Rng ap = make_stream(cfg.seed, realization, Stream::ApGeometry);
    Rng user = make_stream(cfg.seed, realization, Stream::UserGeometry);
    Rng shadow = make_stream(cfg.seed, realization, Stream::Shadowing);
    return generate_realization(cfg, ap, user, shadow);
}

PilotAssignment pilots_from_indices(const std::vector<int>& indices, int tau_p)
{
    const int K = static_cast<int>(indices.size());
    PilotAssignment p;
    p.pilot_index = indices;
    p.cross_gain = Matrix::Zero(K, K);
    for (int a = 0; a < K; ++a) {
        if (indices[a] < 0 || indices[a] >= tau_p) {
            throw std::invalid_argument("pilot index out of range");
        }
        for (int b = 0; b < K; ++b) {
            p.cross_gain(a, b) = indices[a] == indices[b] ? 1.0 : 0.0;
        }
    }
    return p;
}

PilotAssignment assign_pilots(const SystemConfig& cfg, Rng& rng)
{
    std::uniform_int_distribution<int> pick(0, cfg.tau_p - 1);
    std::vector<int> idx(cfg.K);
    for (auto& i : idx) {
        i = pick(rng);
    }
    return pilots_from_indices(idx, cfg.tau_p);
}

ChannelStats compute_gamma(const LargeScaleRealization& real, const PilotAssignment& pilots,
                           const SystemConfig& cfg)
{
    const int M = static_cast<int>(real.beta.rows());
    const int K = static_cast<int>(real.beta.cols());
    ChannelStats s;
    s.beta = real.beta;
    s.cross_gain = pilots.cross_gain;
    s.N = cfg.N;
    s.rho_d = cfg.rho_d();
    s.rho_p = cfg.rho_p();
    s.tau_p = cfg.tau_p;
    s.tau_c = cfg.tau_c;
    s.gamma.resize(M, K);
    const double tp = cfg.tau_p * s.rho_p;
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < K; ++k) {
            double acc = 0.0;
            for (int kp = 0; kp < K; ++kp) {
                double phi = pilots.cross_gain(kp, k);
                acc += real.beta(m, kp) * phi * phi;
            }
            double b = real.beta(m, k);
            s.gamma(m, k) = tp * b * b / (tp * acc + 1.0);
        }
    }
    return s;
}

NetworkDraw draw_network(const SystemConfig& cfg, std::uint64_t realization)
{
    NetworkDraw d;
    d.real = generate_realization(cfg, realization);
    Rng prng = make_stream(cfg.seed, realization, Stream::Pilots);
    d.pilots = assign_pilots(cfg, prng);
    d.stats = compute_gamma(d.real, d.pilots, cfg);
    return d;
}

}  // namespace cfmimo
