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

#include "cfmimo/oracle.hpp"
#include "cfmimo/powermodel.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace cfmimo;
using cfmimo::testing::make_stats;

namespace {

// Total power written as one expression with every AP billing every user.
double total_power_full_mask(const PowerParams& p, const ChannelStats& s, const Matrix& eta,
                             double se)
{
    double amp = 0.0, fix = 0.0, bt = 0.0;
    for (int m = 0; m < s.M(); ++m) {
        double load = 0.0;
        for (int k = 0; k < s.K(); ++k) load += eta(m, k) * s.gamma(m, k);
        amp += s.rho_d * p.n0_W * s.N * load / p.alpha(m);
        fix += s.N * p.p_tc(m) + p.p_0(m);
        bt += p.bandwidth_Hz * p.p_bt(m) * se;
    }
    return amp + fix + bt;
}

NetworkDraw small_draw(int r, int N = 2)
{
    SystemConfig cfg;
    cfg.M = 9;
    cfg.K = 4;
    cfg.N = N;
    cfg.tau_p = 2;
    return draw_network(cfg, r);
}

}  // namespace

TEST_CASE("idle network draws only the fixed power")
{
    NetworkDraw nd = small_draw(0);
    PowerParams p = PowerParams::defaults(nd.stats.M(), SystemConfig{});
    PowerAllocation a = PowerAllocation::zeros(nd.stats.M(), nd.stats.K());
    a.mask.setConstant(false);
    EvalReport r = evaluate(nd.stats, p, a);
    CHECK(r.power_breakdown.total_W() == doctest::Approx(nd.stats.M() * (2 * 0.2 + 0.825)).epsilon(1e-14));
    CHECK(r.ee == 0.0);
    CHECK(q_objective(p, nd.stats, a) == 0.0);
}

TEST_CASE("single AP at full power with zero rate")
{
    SystemConfig cfg;
    Matrix beta = Matrix::Ones(1, 1);
    ChannelStats s = make_stats(beta, Matrix::Ones(1, 1), 1, cfg.rho_d(), cfg.rho_p(), 1, 200);
    PowerParams p = PowerParams::defaults(1, cfg);
    PowerAllocation a = PowerAllocation::zeros(1, 1);
    a.eta(0, 0) = 1.0 / s.gamma(0, 0);
    EvalReport rep;
    rep.se_per_user = {0.0};
    PowerBreakdown b = total_power(p, s, a, rep);
    CHECK(b.total_W() == doctest::Approx(s.rho_d * p.n0_W / 0.4 + 0.2 + 0.825).epsilon(1e-14));
    CHECK(b.amplifier_W == doctest::Approx(cfg.rho_d_W / 0.4).epsilon(1e-12));
    CHECK(b.backhaul_traffic_W == 0.0);
}

TEST_CASE("full mask equals the closed expression on random inputs")
{
    for (int r = 0; r < 1000; ++r) {
        NetworkDraw nd = small_draw(r % 5, 1 + r % 3);
        Rng rng = make_stream(11, r, Stream::Allocation);
        PowerParams p = PowerParams::defaults(nd.stats.M(), SystemConfig{});
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int m = 0; m < nd.stats.M(); ++m) {
            p.p_bt(m) *= 2 * u(rng);
            p.p_0(m) *= 2 * u(rng);
        }
        PowerAllocation a = random_allocation(nd.stats, rng);
        EvalReport rep = evaluate(nd.stats, p, a);
        const double ref = total_power_full_mask(p, nd.stats, a.eta, rep.sum_se);
        CHECK(std::fabs(rep.power_breakdown.total_W() - ref) / ref < 1e-12);
    }
}

TEST_CASE("masked backhaul never exceeds the full-mask term")
{
    NetworkDraw nd = small_draw(2);
    PowerParams p = PowerParams::defaults(nd.stats.M(), SystemConfig{});
    Rng rng(4);
    std::bernoulli_distribution coin(0.5);
    for (int t = 0; t < 50; ++t) {
        PowerAllocation a = random_allocation(nd.stats, rng);
        EvalReport full = evaluate(nd.stats, p, a);
        for (int m = 0; m < a.M(); ++m) {
            for (int k = 0; k < a.K(); ++k) a.mask(m, k) = coin(rng);
        }
        EvalReport masked = evaluate(nd.stats, p, a);
        CHECK(masked.power_breakdown.backhaul_traffic_W <= full.power_breakdown.backhaul_traffic_W * (1 + 1e-12) +
                                                               1e-300);
    }
}

TEST_CASE("EE and Q identities")
{
    NetworkDraw nd = small_draw(3);
    PowerParams p = PowerParams::defaults(nd.stats.M(), SystemConfig{});
    Rng rng(8);
    PowerAllocation a = random_allocation(nd.stats, rng);
    const double ee = energy_efficiency(p, nd.stats, a);
    const double q = q_objective(p, nd.stats, a);
    CHECK(ee == doctest::Approx(1.0 / (1.0 / q + p.sum_p_bt())).epsilon(1e-12));
    const double se = sum_se(nd.stats, a);
    const double denom = p.fixed_power_W(nd.stats.N) + amplifier_power_W(p, nd.stats, a);
    CHECK(ee == doctest::Approx(1.0 / (denom / (p.bandwidth_Hz * se) + p.sum_p_bt())).epsilon(1e-12));

    // Doubling B doubles the rate and the traffic power together.
    PowerParams p2 = p;
    p2.bandwidth_Hz *= 2;
    EvalReport r1 = evaluate(nd.stats, p, a);
    EvalReport r2 = evaluate(nd.stats, p2, a);
    CHECK(r2.power_breakdown.backhaul_traffic_W == doctest::Approx(2 * r1.power_breakdown.backhaul_traffic_W));
    CHECK(r2.power_breakdown.amplifier_W == doctest::Approx(r1.power_breakdown.amplifier_W));
    CHECK(r2.ee * r2.power_breakdown.total_W() == doctest::Approx(2 * r1.ee * r1.power_breakdown.total_W()));
}

TEST_CASE("argmax of Q is the argmax of EE")
{
    NetworkDraw nd = small_draw(4, 1);
    PowerParams p = PowerParams::defaults(nd.stats.M(), SystemConfig{});
    Rng rng(21);
    int best_q = -1, best_ee = -1;
    double vq = -1, vee = -1;
    for (int i = 0; i < 1000; ++i) {
        PowerAllocation a = random_allocation(nd.stats, rng);
        const double q = q_objective(p, nd.stats, a);
        const double ee = energy_efficiency(p, nd.stats, a);
        if (q > vq) {
            vq = q;
            best_q = i;
        }
        if (ee > vee) {
            vee = ee;
            best_ee = i;
        }
    }
    CHECK(best_q == best_ee);
}

TEST_CASE("parameter units and validation")
{
    SystemConfig cfg;
    PowerParams p = PowerParams::uniform(3, cfg, 0.4, 0.2, 0.825, 0.25);
    CHECK(p.p_bt(0) == doctest::Approx(0.25e-9));
    CHECK(p.fixed_power_W(4) == doctest::Approx(3 * (0.8 + 0.825)));
    CHECK_NOTHROW(p.validate(3));
    CHECK_THROWS_AS(p.validate(4), std::invalid_argument);
    p.alpha(1) = 1.5;
    CHECK_THROWS_AS(p.validate(3), std::invalid_argument);
}

TEST_CASE("infeasible sentinel reports zero EE")
{
    NetworkDraw nd = small_draw(0);
    PowerParams p = PowerParams::defaults(nd.stats.M(), SystemConfig{});
    PowerAllocation a = PowerAllocation::infeasible_sentinel(nd.stats.M(), nd.stats.K());
    CHECK(energy_efficiency(p, nd.stats, a) == 0.0);
}
