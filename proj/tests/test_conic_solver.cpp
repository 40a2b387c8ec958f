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

#include "cfmimo/conic/cones.hpp"
#include "cfmimo/conic/program.hpp"
#include "cfmimo/conic/solver.hpp"
#include "cfmimo/conic/sparse_ldl.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace cfmimo::conic;

namespace {

Vec interior_point(const ConeSpec& spec, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec x(spec.dim());
    for (int i = 0; i < spec.orthant; ++i) x(i) = 0.1 + std::fabs(u(rng));
    int o = spec.orthant;
    for (int d : spec.soc) {
        double n = 0.0;
        for (int i = 1; i < d; ++i) {
            x(o + i) = u(rng);
            n += x(o + i) * x(o + i);
        }
        x(o) = std::sqrt(n) + 0.1 + std::fabs(u(rng));
        o += d;
    }
    return x;
}

// Random bounded SOCP in two variables; the box keeps it bounded.
struct Toy {
    ConicProgram prog;
    Eigen::Matrix2d A;
    Eigen::Vector2d b, c, d;
    double e = 0.0;
    double lo = -1.0, hi = 1.0;

    bool feasible(double x, double y) const
    {
        if (x < lo || x > hi || y < lo || y > hi) return false;
        Eigen::Vector2d t = A * Eigen::Vector2d(x, y) + b;
        return t.norm() <= d.dot(Eigen::Vector2d(x, y)) + e;
    }
    double obj(double x, double y) const { return c(0) * x + c(1) * y; }
};

Toy random_toy(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Toy t;
    t.A << u(rng), u(rng), u(rng), u(rng);
    t.b << u(rng), u(rng);
    t.c << u(rng), u(rng);
    t.d << 0.3 * u(rng), 0.3 * u(rng);
    Eigen::Vector2d x0(0.5 * u(rng), 0.5 * u(rng));
    t.e = (t.A * x0 + t.b).norm() - t.d.dot(x0) + 0.05 + 0.5 * std::fabs(u(rng));
    int x = t.prog.add_var("x"), y = t.prog.add_var("y");
    t.prog.set_objective(LinExpr::var(x, t.c(0)).add(y, t.c(1)));
    LinExpr head = LinExpr::var(x, t.d(0)).add(y, t.d(1));
    head.constant = t.e;
    LinExpr r0 = LinExpr::var(x, t.A(0, 0)).add(y, t.A(0, 1));
    r0.constant = t.b(0);
    LinExpr r1 = LinExpr::var(x, t.A(1, 0)).add(y, t.A(1, 1));
    r1.constant = t.b(1);
    t.prog.add_soc(head, {r0, r1}, "cone");
    for (int v : {x, y}) {
        t.prog.add_row(LinExpr::var(v), RowSense::LessEqual, t.hi, "ub");
        t.prog.add_row(LinExpr::var(v, -1.0), RowSense::LessEqual, -t.lo, "lb");
    }
    return t;
}

// Coarse-to-fine grid enumeration around the best feasible point.
double grid_optimum(const Toy& t)
{
    double cx = 0.0, cy = 0.0, half = 1.0;
    double best = -1e300;
    const int n = 200;
    for (int level = 0; level < 16; ++level) {
        double bx = cx, by = cy;
        for (int i = 0; i <= n; ++i) {
            for (int j = 0; j <= n; ++j) {
                const double x = cx - half + 2 * half * i / n;
                const double y = cy - half + 2 * half * j / n;
                if (!t.feasible(x, y)) continue;
                const double v = t.obj(x, y);
                if (v > best) {
                    best = v;
                    bx = x;
                    by = y;
                }
            }
        }
        cx = bx;
        cy = by;
        half /= 4.0;
    }
    return best;
}

}  // namespace

TEST_CASE("jordan algebra and scaling")
{
    ConeSpec spec{3, {4, 2, 5}};
    CHECK(spec.dim() == 14);
    CHECK(spec.degree() == 6);
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        Vec s = interior_point(spec, rng), z = interior_point(spec, rng);
        Vec p, q;
        jordan_product(spec, s, z, p);
        jordan_divide(spec, s, p, q);
        CHECK((q - z).norm() < 1e-9 * (1 + z.norm()));

        NtScaling w(spec);
        REQUIRE(w.update(s, z));
        Vec wz, winv_s;
        w.apply_W(z, wz);
        w.apply_Winv(s, winv_s);
        CHECK((wz - w.lambda()).norm() < 1e-9 * (1 + wz.norm()));
        CHECK((winv_s - w.lambda()).norm() < 1e-9 * (1 + wz.norm()));
        Vec back;
        w.apply_Winv(wz, back);
        CHECK((back - z).norm() < 1e-9 * (1 + z.norm()));

        CHECK(cone_violation(spec, s) == 0.0);
        CHECK(boundary_shift(spec, s) < 0.0);
        Vec dx = -s;
        CHECK(max_step(spec, s, dx) == doctest::Approx(1.0));
        Vec shifted = s;
        add_identity(spec, shifted, -boundary_shift(spec, s) - 1e-3);
        CHECK(boundary_shift(spec, shifted) < 0.0);
    }
    Vec out(spec.dim());
    out.setZero();
    out(0) = -1.0;
    CHECK(cone_violation(spec, out) > 0.0);
}

TEST_CASE("sparse LDL solves quasi-definite systems")
{
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    const int n1 = 12, n2 = 7, n = n1 + n2;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd B(n2, n1);
    for (int i = 0; i < n2; ++i) {
        for (int j = 0; j < n1; ++j) B(i, j) = (g(rng) > 0.8) ? g(rng) : 0.0;
    }
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n1, n1) * 2.0;
    for (int i = 0; i + 1 < n1; i += 3) P(i, i + 1) = P(i + 1, i) = 0.5;
    A.topLeftCorner(n1, n1) = P;
    A.bottomLeftCorner(n2, n1) = B;
    A.topRightCorner(n1, n2) = B.transpose();
    A.bottomRightCorner(n2, n2) = -Eigen::MatrixXd::Identity(n2, n2);

    std::vector<int> colptr{0}, rowind;
    std::vector<double> values;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i <= j; ++i) {
            if (A(i, j) != 0.0 || i == j) {
                rowind.push_back(i);
                values.push_back(A(i, j));
            }
        }
        colptr.push_back(static_cast<int>(rowind.size()));
    }
    std::vector<std::int8_t> signs(n, 1);
    for (int i = n1; i < n; ++i) signs[i] = -1;
    SparseLdl ldl;
    ldl.analyze(n, colptr, rowind);
    CHECK(ldl.factor(values, signs, 1e-13, 1e-7) == 0);
    Eigen::VectorXd rhs(n);
    for (int i = 0; i < n; ++i) rhs(i) = g(rng);
    std::vector<double> b(rhs.data(), rhs.data() + n);
    ldl.solve(b);
    Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(b.data(), n);
    CHECK((A * x - rhs).norm() < 1e-10 * rhs.norm());
    CHECK(ldl.size() == n);
    CHECK(ldl.permutation().size() == static_cast<std::size_t>(n));
}

TEST_CASE("maximize x subject to |x| <= 1")
{
    ConicProgram p("unit");
    int x = p.add_var("x");
    p.set_objective(LinExpr::var(x));
    p.add_soc(LinExpr::constant_value(1.0), {LinExpr::var(x)}, "ball");
    SolverResult r = solve(p);
    REQUIRE(r.status == SolverStatus::Optimal);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("x >= 2 inside the unit ball is infeasible")
{
    ConicProgram p("infeasible");
    int x = p.add_var("x");
    p.set_objective(LinExpr::var(x));
    p.add_soc(LinExpr::constant_value(1.0), {LinExpr::var(x)}, "ball");
    p.add_row(LinExpr::var(x, -1.0), RowSense::LessEqual, -2.0, "x>=2");
    CHECK(solve(p).status == SolverStatus::Infeasible);
}

TEST_CASE("rotated cone and equality rows")
{
    // maximize t s.t. t^2 <= 2*a*b, a + b = 2, a, b >= 0: optimum a = b = 1, t = sqrt(2).
    ConicProgram p("rotated");
    int a = p.add_var("a"), b = p.add_var("b"), t = p.add_var("t");
    p.set_objective(LinExpr::var(t));
    p.add_rotated_soc(LinExpr::var(a), LinExpr::var(b), {LinExpr::var(t)}, "rsoc");
    p.add_row(LinExpr::var(a).add(b, 1.0), RowSense::Equal, 2.0, "sum");
    SolverResult r = solve(p);
    REQUIRE(r.status == SolverStatus::Optimal);
    CHECK(r.x[t] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK(r.x[a] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(p.violation(r.x).max() < 1e-7);
}

TEST_CASE("random small SOCPs agree with grid enumeration")
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 25; ++trial) {
        Toy t = random_toy(rng);
        SolverResult r = solve(t.prog);
        REQUIRE(r.status == SolverStatus::Optimal);
        const double ref = grid_optimum(t);
        CHECK_MESSAGE(std::fabs(r.objective - ref) <= 1e-4 * std::fabs(ref) + 1e-7, "solver " << r.objective << " grid " << ref);
        CHECK(t.prog.violation(r.x).max() < 1e-6);
    }
}

TEST_CASE("program validation and lookup")
{
    ConicProgram p;
    int x = p.add_var("x");
    CHECK(p.find_var("x").value() == x);
    CHECK_FALSE(p.find_var("y").has_value());
    p.add_row(LinExpr::var(5), RowSense::LessEqual, 1.0, "bad");
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    LinExpr e = LinExpr::var(0, 2.0);
    e.constant = 1.0;
    CHECK(e.eval({3.0}) == doctest::Approx(7.0));
}
