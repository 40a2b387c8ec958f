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
 * @file netmodel.hpp
 * @brief Network geometry, large-scale fading, pilot assignment and
 *        MMSE estimation statistics.
 */
#ifndef CFMIMO_NETMODEL_HPP
#define CFMIMO_NETMODEL_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace cfmimo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

enum class ApLayout { Uniform, Center };

struct SystemConfig {
    int M = 100;
    int K = 20;
    int N = 1;
    int tau_c = 200;
    int tau_p = 20;
    double D_km = 1.0;
    double rho_d_W = 1.0;
    double rho_p_W = 0.2;
    double bandwidth_Hz = 20e6;
    double noise_figure_dB = 9.0;
    double sigma_sh_dB = 8.0;
    double d0_km = 0.01;
    double d1_km = 0.05;
    double L_dB = 140.7;
    std::uint64_t seed = 1;
    ApLayout ap_layout = ApLayout::Uniform;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    /// Thermal noise power over the band (Watt).
    double noise_power_W() const;
    double rho_d() const { return rho_d_W / noise_power_W(); }
    double rho_p() const { return rho_p_W / noise_power_W(); }
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

struct LargeScaleRealization {
    std::vector<Point2> ap_positions;
    std::vector<Point2> user_positions;
    Matrix beta;  // M x K, linear scale
};

struct PilotAssignment {
    std::vector<int> pilot_index;
    Matrix cross_gain;  // K x K, |phi_k'^H phi_k|
};

struct ChannelStats {
    Matrix beta;
    Matrix gamma;
    Matrix cross_gain;
    int N = 1;
    double rho_d = 0.0;
    double rho_p = 0.0;
    int tau_p = 1;
    int tau_c = 2;

    int M() const { return static_cast<int>(beta.rows()); }
    int K() const { return static_cast<int>(beta.cols()); }
    /// Fraction of the coherence interval left for downlink data.
    double prelog() const { return 1.0 - static_cast<double>(tau_p) / tau_c; }
};

/// Independent random sub-streams derived from one master seed.
enum class Stream : std::uint64_t {
    ApGeometry = 1,
    UserGeometry = 2,
    Shadowing = 3,
    Pilots = 4,
    MonteCarlo = 5,
    Allocation = 6,
};

Rng make_stream(std::uint64_t seed, std::uint64_t realization, Stream stream);

/// Minimum-image distance on a square torus of side `side`.
double torus_distance(const Point2& a, const Point2& b, double side);

double path_loss_dB(double d_km, const SystemConfig& cfg);

/// Draws AP and user positions, then shadowed gains for every pair.
LargeScaleRealization generate_realization(const SystemConfig& cfg, Rng& ap_rng, Rng& user_rng,
                                           Rng& shadow_rng);

/// Convenience overload using the sub-streams of (cfg.seed, realization).
LargeScaleRealization generate_realization(const SystemConfig& cfg, std::uint64_t realization);

/// Recomputes beta for fixed positions with fresh shadowing.
Matrix shadowed_gains(const SystemConfig& cfg, const std::vector<Point2>& aps,
                      const std::vector<Point2>& users, Rng& shadow_rng);

PilotAssignment assign_pilots(const SystemConfig& cfg, Rng& rng);

/// Builds the orthogonal-codebook cross gains for given indices.
PilotAssignment pilots_from_indices(const std::vector<int>& indices, int tau_p);

ChannelStats compute_gamma(const LargeScaleRealization& real, const PilotAssignment& pilots,
                           const SystemConfig& cfg);

/// Realization, pilots and statistics for (cfg.seed, realization).
struct NetworkDraw {
    LargeScaleRealization real;
    PilotAssignment pilots;
    ChannelStats stats;
};

NetworkDraw draw_network(const SystemConfig& cfg, std::uint64_t realization);

}  // namespace cfmimo

#endif
