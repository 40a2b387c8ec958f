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

#include "cfmimo/conic/builders.hpp"
#include "cfmimo/conic/solver.hpp"
#include "cfmimo/oracle.hpp"
#include "cfmimo/sca.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace cfmimo;
using namespace cfmimo::conic;
using cfmimo::testing::make_stats;

namespace {

NetworkDraw draw(int M, int K, int N, int tau_p, int r)
{
    SystemConfig cfg;
    cfg.M = M;
    cfg.K = K;
    cfg.N = N;
    cfg.tau_p = tau_p;
    return draw_network(cfg, r);
}

ChannelStats single_link(double beta)
{
    SystemConfig cfg;
    return make_stats(Matrix::Constant(1, 1, beta), Matrix::Ones(1, 1), 1, cfg.rho_d(), cfg.rho_p(), 1, 200);
}

}  // namespace

TEST_CASE("SINR threshold inverts the rate")
{
    NetworkDraw nd = draw(3, 2, 1, 20, 0);
    const double t = sinr_threshold(nd.stats, 1.3);
    CHECK(se_from_sinr(nd.stats, t) == doctest::Approx(1.3).epsilon(1e-12));
}

TEST_CASE("zero targets are feasible at zero power")
{
    NetworkDraw nd = draw(6, 3, 2, 2, 1);
    std::vector<double> zero(3, 0.0);
    FeasibilityProgram fp = build_feasibility(nd.stats, zero);
    std::vector<double> x(fp.prog.n_vars(), 0.0);
    CHECK(fp.prog.violation(x).max() == 0.0);
    SolverResult r = solve(fp.prog);
    CHECK(r.status == SolverStatus::Optimal);
}

TEST_CASE("targets above the full-power ceiling are infeasible")
{
    ChannelStats s = single_link(1e-9);
    const double full = 1.0 / s.gamma(0, 0);
    PowerAllocation a = PowerAllocation::zeros(1, 1);
    a.eta(0, 0) = full;
    const double ceiling = se_k(s, a, 0);
    CHECK(sinr_k(s, a, 0) == doctest::Approx(s.rho_d * s.gamma(0, 0) / (s.rho_d * s.beta(0, 0) + 1.0)));

    FeasibilityProgram above = build_feasibility(s, {ceiling * 1.01});
    CHECK(solve(above.prog).status == SolverStatus::Infeasible);
    FeasibilityProgram below = build_feasibility(s, {ceiling * 0.99});
    CHECK(solve(below.prog).status == SolverStatus::Optimal);
}

TEST_CASE("feasible solutions meet the targets")
{
    for (int r = 0; r < 5; ++r) {
        NetworkDraw nd = draw(10, 4, 1 + r % 2, 2, r);
        std::vector<double> targets(4);
        const PowerAllocation eq = PowerAllocation::from_c(
            (1.0 / (nd.stats.N * nd.stats.K() * nd.stats.gamma.array())).sqrt().matrix());
        for (int k = 0; k < 4; ++k) targets[k] = 0.8 * se_k(nd.stats, eq, k);
        FeasibilityProgram fp = build_feasibility(nd.stats, targets);
        SolverResult res = solve(fp.prog);
        REQUIRE(res.status == SolverStatus::Optimal);
        Matrix c = recover_feasibility_c(fp, res.x);
        Matrix clipped = clip_to_budget(nd.stats, c);
        CHECK(PowerAllocation::from_c(clipped).max_ap_excess(nd.stats) <= 1e-12);
        for (int k = 0; k < 4; ++k) CHECK(se_k(nd.stats, PowerAllocation::from_c(clipped), k) >= targets[k] - 1e-6);
    }
}

TEST_CASE("masked pairs get no variables")
{
    NetworkDraw nd = draw(4, 2, 1, 2, 0);
    BoolMatrix mask = BoolMatrix::Constant(4, 2, true);
    mask(0, 0) = false;
    mask.row(3).setConstant(false);
    FeasibilityProgram fp = build_feasibility(nd.stats, {0.0, 0.0}, &mask);
    CHECK(fp.c_index(0, 0) == -1);
    CHECK(fp.c_index(1, 0) >= 0);
    CHECK(fp.r_index[3] == -1);
}

TEST_CASE("Taylor anchor is exact")
{
    NetworkDraw nd = draw(8, 4, 2, 2, 2);
    Rng rng(1);
    Matrix c = random_allocation(nd.stats, rng).c();
    for (int k = 0; k < 4; ++k) {
        const double u = 1.0 + sinr_k_c(nd.stats, c, k);
        for (double theta : {1.0, 3.7}) {
            CHECK(f_linearized(nd.stats, c, u, theta * c, theta * u, theta, k) ==
                  doctest::Approx(theta * f_value(nd.stats, c, u, k)).epsilon(1e-12));
        }
        // The linearization is a global under-estimator of the convex f.
        Matrix c2 = random_allocation(nd.stats, rng).c();
        const double u2 = 2.0 + k;
        CHECK(f_linearized(nd.stats, c, u, c2, u2, 1.0, k) <= f_value(nd.stats, c2, u2, k) * (1 + 1e-12));
    }
}

TEST_CASE("scaled previous point is feasible for the next subproblem")
{
    for (int r = 0; r < 6; ++r) {
        NetworkDraw nd = draw(10, 4, 1 + r % 3, 2, r);
        PowerParams params = PowerParams::defaults(10, SystemConfig{});
        std::vector<double> targets(4, 0.0);
        Rng rng = make_stream(2, r, Stream::Allocation);
        ScaPoint pt;
        pt.c = random_allocation(nd.stats, rng).c();
        pt.u.resize(4);
        pt.t.resize(4);
        for (int k = 0; k < 4; ++k) {
            pt.u(k) = 1.0 + sinr_k_c(nd.stats, pt.c, k);
            pt.t(k) = nd.stats.prelog() * std::log2(pt.u(k));
            targets[k] = 0.9 * pt.t(k);
        }
        pt.theta = 1.0 / fractional_denominator_W(nd.stats, params, pt.c);
        ScaSubproblem sp = build_sca_subproblem(nd.stats, params, pt.c, pt.u, targets);
        CHECK(sp.power_unit_W == doctest::Approx(1.0 / pt.theta));
        std::vector<double> x = encode_point(sp, nd.stats, pt);
        CHECK(sp.prog.violation(x).max() < 1e-9);

        ScaPoint back = recover_point(sp, x);
        CHECK((back.c - pt.c).norm() < 1e-12 * (1 + pt.c.norm()));
        CHECK((back.u - pt.u).norm() < 1e-12 * pt.u.norm());
        CHECK(back.theta == doctest::Approx(pt.theta).epsilon(1e-14));
        CHECK(scaled_t(sp, x).sum() == doctest::Approx(pt.theta * pt.t.sum()).epsilon(1e-12));
        CHECK(sp.prog.objective().eval(x) ==
              doctest::Approx(params.bandwidth_Hz * pt.theta * pt.t.sum()).epsilon(1e-12));

        // Solving can only improve on the carried-over point.
        SolverResult res = solve(sp.prog);
        REQUIRE(res.status == SolverStatus::Optimal);
        CHECK(res.objective >= sp.prog.objective().eval(x) * (1 - 1e-7));
    }
}

namespace {

// Iterates single-user subproblems from 0.3 of full amplitude.
double iterate_single_user(const ChannelStats& s, const PowerParams& params, int iterations)
{
    const double cmax = 1.0 / std::sqrt(s.gamma(0, 0));
    Matrix c = Matrix::Constant(1, 1, 0.3 * cmax);
    Vector u(1);
    for (int it = 0; it < iterations; ++it) {
        u(0) = 1.0 + sinr_k_c(s, c, 0);
        ScaSubproblem sp = build_sca_subproblem(s, params, c, u, {0.0});
        SolverResult res = solve(sp.prog);
        REQUIRE(res.status == SolverStatus::Optimal);
        c = recover_point(sp, res.x).c;
    }
    return c(0, 0) / cmax;
}

// Fraction of full amplitude maximizing the EE on a fine scan, and whether
// the EE increases over the whole range.
double scan_single_user(const ChannelStats& s, const PowerParams& params, bool& monotone)
{
    const double cmax = 1.0 / std::sqrt(s.gamma(0, 0));
    double prev = -1.0, best = -1.0, arg = 0.0;
    monotone = true;
    const int n = 20000;
    for (int i = 1; i <= n; ++i) {
        const double f = static_cast<double>(i) / n;
        const double ee = energy_efficiency(params, s, PowerAllocation::from_c(Matrix::Constant(1, 1, f * cmax)));
        monotone = monotone && ee > prev;
        if (ee > best) {
            best = ee;
            arg = f;
        }
        prev = ee;
    }
    return arg;
}

}  // namespace

TEST_CASE("single-user subproblems climb to full power when EE grows with power")
{
    SystemConfig cfg;
    ChannelStats s = single_link(1e-11);
    // A large fixed power makes the EE increase all the way to full power.
    PowerParams heavy = PowerParams::uniform(1, cfg, 0.4, 0.2, 1000.0, 0.25);
    bool monotone = false;
    CHECK(scan_single_user(s, heavy, monotone) == 1.0);
    REQUIRE(monotone);
    CHECK(iterate_single_user(s, heavy, 30) == doctest::Approx(1.0).epsilon(1e-6));

    // With the default fixed power the optimum is interior and the iterates find it.
    PowerParams light = PowerParams::defaults(1, cfg);
    const double arg = scan_single_user(s, light, monotone);
    CHECK_FALSE(monotone);
    CHECK(arg < 0.9);
    CHECK(iterate_single_user(s, light, 40) == doctest::Approx(arg).epsilon(1e-3));
}

TEST_CASE("builder input checks")
{
    NetworkDraw nd = draw(3, 2, 1, 2, 0);
    PowerParams params = PowerParams::defaults(3, SystemConfig{});
    CHECK_THROWS_AS(build_feasibility(nd.stats, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_sca_subproblem(nd.stats, params, Matrix::Zero(3, 2), Vector::Zero(2), {0.0, 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_sca_subproblem(nd.stats, params, Matrix::Zero(2, 2), Vector::Ones(2), {0.0, 0.0}),
                    std::invalid_argument);
}
