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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cfmimo/netmodel.hpp"
#include "cfmimo/serialize.hpp"
#include "test_util.hpp"

#include <cmath>
#include <sstream>

using namespace cfmimo;

TEST_CASE("torus distance wraps around the edges")
{
    CHECK(torus_distance({0.05, 0.0}, {0.95, 0.0}, 1.0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(torus_distance({0.0, 0.0}, {0.5, 0.5}, 1.0) == doctest::Approx(std::sqrt(0.5)));

    Rng rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
        const double ab = torus_distance(a, b, 1.0);
        CHECK(ab == doctest::Approx(torus_distance(b, a, 1.0)));
        CHECK(ab <= std::sqrt(0.5) + 1e-12);
        CHECK(ab <= torus_distance(a, c, 1.0) + torus_distance(c, b, 1.0) + 1e-12);
    }
}

TEST_CASE("three-slope path loss")
{
    SystemConfig cfg;
    CHECK(path_loss_dB(1.0, cfg) == doctest::Approx(-140.7).epsilon(1e-12));
    CHECK(path_loss_dB(0.05, cfg) == doctest::Approx(-140.7 - 35.0 * std::log10(0.05)));
    CHECK(std::fabs(path_loss_dB(0.05, cfg) + 95.18) < 0.02);
    const double flat = -140.7 - 15.0 * std::log10(0.05) - 20.0 * std::log10(0.01);
    CHECK(path_loss_dB(0.01, cfg) == doctest::Approx(flat));
    CHECK(path_loss_dB(0.001, cfg) == doctest::Approx(flat));
    CHECK(flat == doctest::Approx(-81.19).epsilon(1e-4));

    // Continuous and nonincreasing, breakpoints included.
    double prev = path_loss_dB(0.0, cfg);
    for (int i = 1; i <= 1000; ++i) {
        const double d = 1.5 * i / 1000.0;
        const double pl = path_loss_dB(d, cfg);
        CHECK(pl <= prev + 1e-12);
        prev = pl;
    }
    for (double b : {cfg.d0_km, cfg.d1_km}) {
        CHECK(path_loss_dB(b * (1 - 1e-9), cfg) == doctest::Approx(path_loss_dB(b * (1 + 1e-9), cfg)));
    }
}

TEST_CASE("shadowing")
{
    SystemConfig cfg;
    cfg.sigma_sh_dB = 0.0;
    std::vector<Point2> ap{{0.5, 0.5}};
    std::vector<Point2> user{{0.5 + cfg.d0_km, 0.5}};
    Rng rng(1);
    Matrix b = shadowed_gains(cfg, ap, user, rng);
    CHECK(b(0, 0) == std::pow(10.0, path_loss_dB(torus_distance(ap[0], user[0], 1.0), cfg) / 10.0));

    cfg.sigma_sh_dB = 8.0;
    cfg.M = 1000;
    cfg.K = 100;
    LargeScaleRealization r = generate_realization(cfg, 0);
    double s = 0.0, s2 = 0.0;
    const int n = cfg.M * cfg.K;
    for (int m = 0; m < cfg.M; ++m) {
        for (int k = 0; k < cfg.K; ++k) {
            const double d = torus_distance(r.ap_positions[m], r.user_positions[k], cfg.D_km);
            const double z = 10.0 * std::log10(r.beta(m, k)) - path_loss_dB(d, cfg);
            s += z;
            s2 += z * z;
        }
    }
    const double mean = s / n;
    const double sd = std::sqrt((s2 - n * mean * mean) / (n - 1));
    CHECK(std::fabs(sd - 8.0) / 8.0 < 0.02);
    CHECK((r.beta.array() > 0.0).all());
    for (const auto& p : r.ap_positions) {
        CHECK(p.x >= 0.0);
        CHECK(p.x < 1.0);
        CHECK(p.y >= 0.0);
        CHECK(p.y < 1.0);
    }
}

TEST_CASE("pilot cross gains")
{
    PilotAssignment p = pilots_from_indices({0, 1, 2, 3}, 4);
    CHECK(p.cross_gain.isApprox(Matrix::Identity(4, 4)));

    SystemConfig cfg;
    cfg.K = 5;
    cfg.tau_p = 1;
    Rng rng(3);
    p = assign_pilots(cfg, rng);
    CHECK(p.cross_gain.isApprox(Matrix::Ones(5, 5)));

    p = pilots_from_indices({2, 2}, 4);
    CHECK(p.cross_gain(0, 1) == 1.0);

    cfg.K = 30;
    cfg.tau_p = 7;
    p = assign_pilots(cfg, rng);
    for (int a = 0; a < 30; ++a) {
        CHECK(p.pilot_index[a] >= 0);
        CHECK(p.pilot_index[a] < 7);
        for (int b = 0; b < 30; ++b) {
            CHECK(p.cross_gain(a, b) == (p.pilot_index[a] == p.pilot_index[b] ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("channel estimate quality")
{
    SystemConfig cfg;
    cfg.M = 1;
    cfg.K = 1;
    cfg.tau_p = 1;
    cfg.rho_p_W = cfg.noise_power_W();  // tau_p * rho_p = 1
    LargeScaleRealization r;
    r.beta = Matrix::Ones(1, 1);
    ChannelStats s = compute_gamma(r, pilots_from_indices({0}, 1), cfg);
    CHECK(s.gamma(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

    cfg.K = 2;
    cfg.rho_p_W = 100.0 * cfg.noise_power_W();
    r.beta = Matrix::Ones(1, 2);
    s = compute_gamma(r, pilots_from_indices({0, 0}, 1), cfg);
    CHECK(s.gamma(0, 0) == doctest::Approx(100.0 / 201.0).epsilon(1e-12));
    CHECK(s.gamma(0, 1) == doctest::Approx(100.0 / 201.0).epsilon(1e-12));

    r.beta(0, 1) = 0.0;
    s = compute_gamma(r, pilots_from_indices({0, 0}, 1), cfg);
    CHECK(s.gamma(0, 1) == 0.0);
}

TEST_CASE("gamma is monotone in pilot power and interference")
{
    SystemConfig cfg;
    cfg.M = 6;
    cfg.K = 4;
    cfg.tau_p = 2;
    LargeScaleRealization r = generate_realization(cfg, 3);
    PilotAssignment p = pilots_from_indices({0, 0, 1, 1}, 2);

    Matrix prev = Matrix::Zero(cfg.M, cfg.K);
    for (int e = -3; e <= 3; ++e) {
        SystemConfig c = cfg;
        c.rho_p_W = std::pow(10.0, e);
        ChannelStats s = compute_gamma(r, p, c);
        CHECK((s.gamma.array() >= prev.array()).all());
        CHECK((s.gamma.array() <= s.beta.array()).all());
        prev = s.gamma;
    }
    // Orthogonal pilots and huge pilot power approach gamma = beta.
    SystemConfig c = cfg;
    c.rho_p_W = 1e6;
    ChannelStats s = compute_gamma(r, pilots_from_indices({0, 1, 2, 3}, 4), c);
    CHECK(((s.gamma.array() / s.beta.array()) > 0.999).all());

    // A larger interferer on the shared pilot lowers gamma.
    ChannelStats base = compute_gamma(r, p, cfg);
    LargeScaleRealization r2 = r;
    r2.beta(2, 1) *= 1.5;
    ChannelStats bumped = compute_gamma(r2, p, cfg);
    CHECK(bumped.gamma(2, 0) < base.gamma(2, 0));
    CHECK(bumped.gamma(2, 2) == base.gamma(2, 2));
}

TEST_CASE("config validation")
{
    SystemConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.tau_p = cfg.tau_c;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SystemConfig{};
    cfg.M = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SystemConfig{};
    cfg.d0_km = 0.06;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = SystemConfig{};
    cfg.rho_d_W = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("noise power and streams")
{
    SystemConfig cfg;
    const double n0 = std::pow(10.0, (-174.0 + 10.0 * std::log10(20e6) + 9.0 - 30.0) / 10.0);
    CHECK(cfg.noise_power_W() == doctest::Approx(n0).epsilon(1e-12));

    Rng a = make_stream(1, 0, Stream::Shadowing);
    Rng b = make_stream(1, 0, Stream::Shadowing);
    Rng c = make_stream(1, 0, Stream::Pilots);
    Rng d = make_stream(1, 1, Stream::Shadowing);
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != d());
}

TEST_CASE("serialization round trip is bit exact")
{
    SystemConfig cfg;
    cfg.M = 7;
    cfg.K = 5;
    cfg.N = 2;
    cfg.tau_p = 3;
    NetworkDraw nd = draw_network(cfg, 4);

    std::stringstream ss;
    write_realization(ss, nd.real, nd.pilots);
    LargeScaleRealization r;
    PilotAssignment p;
    read_realization(ss, r, p);
    CHECK(r.beta == nd.real.beta);
    CHECK(p.pilot_index == nd.pilots.pilot_index);
    CHECK(p.cross_gain == nd.pilots.cross_gain);
    REQUIRE(r.ap_positions.size() == nd.real.ap_positions.size());
    CHECK(r.ap_positions[3].y == nd.real.ap_positions[3].y);

    std::stringstream st;
    write_stats(st, nd.stats);
    ChannelStats s = read_stats(st);
    CHECK(s.gamma == nd.stats.gamma);
    CHECK(s.beta == nd.stats.beta);
    CHECK(s.N == 2);
    CHECK(s.rho_d == nd.stats.rho_d);
    CHECK(s.tau_p == 3);

    for (double v : {0.1, 1.0 / 3.0, 6.02e-23, -2.5e300, 0.0}) CHECK(parse_double(format_double(v)) == v);

    std::stringstream bad("matrix beta 2 2\n1 2\n3\n");
    CHECK_THROWS(read_matrix(bad, "beta"));
}

TEST_CASE("draws are deterministic")
{
    SystemConfig cfg;
    cfg.M = 10;
    cfg.K = 4;
    NetworkDraw a = draw_network(cfg, 2);
    NetworkDraw b = draw_network(cfg, 2);
    NetworkDraw c = draw_network(cfg, 3);
    CHECK(a.stats.gamma == b.stats.gamma);
    CHECK(a.stats.gamma != c.stats.gamma);
}
