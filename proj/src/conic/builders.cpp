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
#include "cfmimo/conic/builders.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cfmimo::conic {

namespace {

const double kLog2e = 1.0 / std::log(2.0);

bool served(const ChannelStats& stats, const BoolMatrix* mask, int m, int k)
{
    if (!(stats.gamma(m, k) > 0.0)) return false;
    return mask == nullptr || (*mask)(m, k);
}

std::string pair_name(const char* base, int m, int k)
{
    return std::string(base) + "[" + std::to_string(m) + "," + std::to_string(k) + "]";
}

std::string idx_name(const char* base, int i)
{
    return std::string(base) + "[" + std::to_string(i) + "]";
}

// Program variables hold x_mk = sqrt(gamma_mk) c_mk; this maps c to x.
double amp(const ChannelStats& stats, int m, int k) { return std::sqrt(stats.gamma(m, k)); }

// sum_m scale * gbar_{k'k,m} * c_mk' in terms of the x variables

LinExpr gbar_expr(const ChannelStats& stats, const IndexMatrix& idx, int kp, int k, double scale)
{
    LinExpr e;
    const Vector g = barred_gamma(stats, kp, k);
    for (int m = 0; m < stats.M(); ++m) {
        if (idx(m, kp) >= 0 && g(m) != 0.0) e.add(idx(m, kp), scale * g(m) / amp(stats, m, kp));
    }
    return e;
}

// Shared structure: x variables, r variables, nonnegativity and AP cones.
void add_power_variables(ConicProgram& prog, const ChannelStats& stats, const BoolMatrix* mask,
                         const char* cname, IndexMatrix& c_index, std::vector<int>& r_index)
{
    const int M = stats.M(), K = stats.K();
    c_index = IndexMatrix::Constant(M, K, -1);
    r_index.assign(M, -1);
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < K; ++k) {
            if (served(stats, mask, m, k)) c_index(m, k) = prog.add_var(pair_name(cname, m, k));
        }
    }
    for (int m = 0; m < M; ++m) {
        bool any = false;
        for (int k = 0; k < K; ++k) any = any || c_index(m, k) >= 0;
        if (any) r_index[m] = prog.add_var(idx_name("r", m));
    }
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < K; ++k) {
            if (c_index(m, k) >= 0) {
                prog.add_row(LinExpr::var(c_index(m, k), -1.0), RowSense::LessEqual, 0.0,
                             pair_name("nonneg", m, k));
            }
        }
    }
    for (int m = 0; m < M; ++m) {
        if (r_index[m] < 0) continue;
        std::vector<LinExpr> tail;
        for (int k = 0; k < K; ++k) {
            if (c_index(m, k) >= 0) {
                tail.push_back(LinExpr::var(c_index(m, k)));
            }
        }
        prog.add_soc(LinExpr::var(r_index[m]), std::move(tail), idx_name("ap_cone", m));
    }
}

// Interference tail shared by the QoS and linearized-SINR cones:
// (sqrt(rho_d) N gbar_k'k' c_k' for k' != k, sqrt(rho_d N beta_mk) r_m, last).
std::vector<LinExpr> interference_tail(const ChannelStats& stats, const IndexMatrix& c_index,
                                       const std::vector<int>& r_index, int k,
                                       const LinExpr& last)
{
    const int M = stats.M(), K = stats.K();
    const double N = stats.N;
    const double scale = N * std::sqrt(stats.rho_d);
    std::vector<LinExpr> tail;
    for (int kp = 0; kp < K; ++kp) {
        if (kp == k || stats.cross_gain(kp, k) == 0.0) continue;
        LinExpr e = gbar_expr(stats, c_index, kp, k, scale);
        if (!e.terms.empty()) tail.push_back(std::move(e));
    }
    for (int m = 0; m < M; ++m) {
        if (r_index[m] >= 0) {
            tail.push_back(LinExpr::var(r_index[m], std::sqrt(stats.rho_d * N * stats.beta(m, k))));
        }
    }
    tail.push_back(last);
    return tail;
}

void add_qos_cones(ConicProgram& prog, const ChannelStats& stats, const IndexMatrix& c_index,
                   const std::vector<int>& r_index, const std::vector<double>& targets,
                   const LinExpr& noise_entry)
{
    const int K = stats.K();
    const double scale = stats.N * std::sqrt(stats.rho_d);
    for (int k = 0; k < K; ++k) {
        double thr = sinr_threshold(stats, targets[k]);
        if (!(thr > 0.0)) continue;
        LinExpr head = gbar_expr(stats, c_index, k, k, scale / std::sqrt(thr));
        prog.add_soc(head, interference_tail(stats, c_index, r_index, k, noise_entry),
                     idx_name("qos", k));
    }
}

void check_targets(const ChannelStats& stats, const std::vector<double>& targets)
{
    if (static_cast<int>(targets.size()) != stats.K()) {
        throw std::invalid_argument("targets: expected one entry per user");
    }
    for (double t : targets) {
        if (!(t >= 0.0)) throw std::invalid_argument("targets: must be >= 0");
    }
}

}  // namespace

double sinr_threshold(const ChannelStats& stats, double se_target)
{
    return std::exp2(se_target / stats.prelog()) - 1.0;
}

FeasibilityProgram build_feasibility(const ChannelStats& stats, const std::vector<double>& targets,
                                     const BoolMatrix* mask)
{
    check_targets(stats, targets);
    FeasibilityProgram fp{ConicProgram("feasibility"), {}, {}, stats.gamma.cwiseSqrt()};
    add_power_variables(fp.prog, stats, mask, "x", fp.c_index, fp.r_index);
    const double cap = 1.0 / std::sqrt(static_cast<double>(stats.N));
    for (int m = 0; m < stats.M(); ++m) {
        if (fp.r_index[m] >= 0) {
            fp.prog.add_row(LinExpr::var(fp.r_index[m]), RowSense::LessEqual, cap,
                            idx_name("ap_budget", m));
        }
    }
    add_qos_cones(fp.prog, stats, fp.c_index, fp.r_index, targets, LinExpr::constant_value(1.0));
    return fp;
}

Matrix recover_feasibility_c(const FeasibilityProgram& fp, const std::vector<double>& x)
{
    Matrix c = Matrix::Zero(fp.c_index.rows(), fp.c_index.cols());
    for (Eigen::Index m = 0; m < c.rows(); ++m) {
        for (Eigen::Index k = 0; k < c.cols(); ++k) {
            if (fp.c_index(m, k) >= 0) {
                c(m, k) = std::max(0.0, x[fp.c_index(m, k)]) / fp.amp(m, k);
            }
        }
    }
    return c;
}

double fractional_denominator_W(const ChannelStats& stats, const PowerParams& params,
                                const Matrix& c)
{
    CompensatedSum amp;
    for (int m = 0; m < stats.M(); ++m) {
        CompensatedSum ap;
        for (int k = 0; k < stats.K(); ++k) ap.add(c(m, k) * c(m, k) * stats.gamma(m, k));
        amp.add(ap.value() / params.alpha(m));
    }
    return params.fixed_power_W(stats.N) + stats.rho_d * params.n0_W * stats.N * amp.value();
}

double f_value(const ChannelStats& stats, const Matrix& c, double u, int k)
{
    SinrTerms t = sinr_terms_c(stats, c, k);
    return (t.desired + t.contamination + t.uncertainty + 1.0) / u;
}

// Gradient of f with respect to c at (c_prev, u_prev).
static Matrix f_gradient(const ChannelStats& stats, const Matrix& c_prev, double u_prev, int k)
{
    const int M = stats.M(), K = stats.K();
    const double N = stats.N;
    Matrix g = Matrix::Zero(M, K);
    for (int kp = 0; kp < K; ++kp) {
        const Vector gb = barred_gamma(stats, kp, k);
        const double proj = gb.dot(c_prev.col(kp));
        for (int m = 0; m < M; ++m) {
            g(m, kp) = 2.0 * stats.rho_d / u_prev *
                       (N * N * proj * gb(m) + N * stats.gamma(m, kp) * stats.beta(m, k) * c_prev(m, kp));
        }
    }
    return g;
}

double f_linearized(const ChannelStats& stats, const Matrix& c_prev, double u_prev,
                    const Matrix& cdot, double udot, double theta, int k)
{
    const double f = f_value(stats, c_prev, u_prev, k);
    const Matrix g = f_gradient(stats, c_prev, u_prev, k);
    return theta * 2.0 / u_prev + (g.array() * cdot.array()).sum() - f / u_prev * udot;
}

ScaSubproblem build_sca_subproblem(const ChannelStats& stats, const PowerParams& params,
                                   const Matrix& c_prev, const Vector& u_prev,
                                   const std::vector<double>& targets, const BoolMatrix* mask,
                                   double power_unit_W)
{
    check_targets(stats, targets);
    const int M = stats.M(), K = stats.K();
    const double N = stats.N;
    if (u_prev.size() != K) throw std::invalid_argument("u_prev: expected one entry per user");
    for (int k = 0; k < K; ++k) {
        if (!(u_prev(k) > 0.0)) throw std::invalid_argument("u_prev: entries must be > 0");
    }
    if (c_prev.rows() != M || c_prev.cols() != K) {
        throw std::invalid_argument("c_prev: dimension mismatch");
    }

    ScaSubproblem sp{ConicProgram("sca_subproblem"), {}, {}, stats.gamma.cwiseSqrt(), {}, {}, -1, 1.0,
                     Vector(K)};
    sp.power_unit_W = power_unit_W > 0.0 ? power_unit_W : fractional_denominator_W(stats, params, c_prev);
    const double pu = sp.power_unit_W;
    ConicProgram& prog = sp.prog;

    add_power_variables(prog, stats, mask, "xdot", sp.c_index, sp.r_index);
    sp.t_index.resize(K);
    sp.u_index.resize(K);
    for (int k = 0; k < K; ++k) sp.t_index[k] = prog.add_var(idx_name("tdot", k));
    for (int k = 0; k < K; ++k) sp.u_index[k] = prog.add_var(idx_name("udot", k));
    sp.theta_index = prog.add_var("theta");
    const int th = sp.theta_index;

    LinExpr obj;
    for (int k = 0; k < K; ++k) obj.add(sp.t_index[k], params.bandwidth_Hz / pu);
    prog.set_objective(obj);

    // Per-AP budget: r_m <= theta / sqrt(N).
    for (int m = 0; m < M; ++m) {
        if (sp.r_index[m] < 0) continue;
        LinExpr e = LinExpr::var(sp.r_index[m]);
        e.add(th, -1.0 / std::sqrt(N));
        prog.add_row(e, RowSense::LessEqual, 0.0, idx_name("ap_budget", m));
    }

    add_qos_cones(prog, stats, sp.c_index, sp.r_index, targets, LinExpr::var(th));

    // Power epigraph: P_fix theta^2 + amp(cdot) <= theta, as a rotated cone with
    // heads (theta, 1/2).
    {
        std::vector<LinExpr> tail;
        tail.push_back(LinExpr::var(th, std::sqrt(params.fixed_power_W(stats.N) / pu)));
        const double rho_d_W = stats.rho_d * params.n0_W;
        for (int m = 0; m < M; ++m) {
            if (sp.r_index[m] < 0) continue;
            tail.push_back(LinExpr::var(sp.r_index[m], std::sqrt(rho_d_W * N / (params.alpha(m) * pu))));
        }
        prog.add_rotated_soc(LinExpr::var(th), LinExpr::constant_value(0.5), std::move(tail),
                             "power_epigraph");
    }

    // Rate bound: log2(e) u_prev theta^2 <= udot (theta (log2 u_prev + log2 e) - tdot / prelog).
    const double inv_prelog = 1.0 / stats.prelog();
    for (int k = 0; k < K; ++k) {
        const double un = u_prev(k);
        LinExpr L = LinExpr::var(th, std::log2(un) + kLog2e);
        L.add(sp.t_index[k], -inv_prelog);
        std::vector<LinExpr> tail{LinExpr::var(th, std::sqrt(2.0 * kLog2e * un))};
        prog.add_rotated_soc(LinExpr::var(sp.u_index[k]), L, std::move(tail), idx_name("rate", k));
    }

    // Linearized SINR bound: interference(cdot, theta)^2 <= theta * Fbar.
    for (int k = 0; k < K; ++k) {
        const double un = u_prev(k);
        sp.f_prev(k) = f_value(stats, c_prev, un, k);
        const Matrix g = f_gradient(stats, c_prev, un, k);
        LinExpr half_f = LinExpr::var(th, 1.0 / un);
        for (int m = 0; m < M; ++m) {
            for (int kp = 0; kp < K; ++kp) {
                if (sp.c_index(m, kp) >= 0 && g(m, kp) != 0.0) half_f.add(sp.c_index(m, kp), 0.5 * g(m, kp) / amp(stats, m, kp));
            }
        }
        half_f.add(sp.u_index[k], -0.5 * sp.f_prev(k) / un);
        prog.add_rotated_soc(LinExpr::var(th), half_f,
                             interference_tail(stats, sp.c_index, sp.r_index, k, LinExpr::var(th)),
                             idx_name("sinr_bound", k));
    }
    return sp;
}

std::vector<double> encode_point(const ScaSubproblem& sp, const ChannelStats& stats,
                                 const ScaPoint& pt)
{
    std::vector<double> x(sp.prog.n_vars(), 0.0);
    const double th = pt.theta * sp.power_unit_W;
    const int M = stats.M(), K = stats.K();
    for (int m = 0; m < M; ++m) {
        double p = 0.0;
        for (int k = 0; k < K; ++k) {
            if (sp.c_index(m, k) >= 0) {
                x[sp.c_index(m, k)] = th * amp(stats, m, k) * pt.c(m, k);
                p += stats.gamma(m, k) * pt.c(m, k) * pt.c(m, k);
            }
        }
        if (sp.r_index[m] >= 0) x[sp.r_index[m]] = th * std::sqrt(p);
    }
    for (int k = 0; k < K; ++k) {
        x[sp.t_index[k]] = th * pt.t(k);
        x[sp.u_index[k]] = th * pt.u(k);
    }
    x[sp.theta_index] = th;
    return x;
}

ScaPoint recover_point(const ScaSubproblem& sp, const std::vector<double>& x)
{
    const int M = static_cast<int>(sp.c_index.rows()), K = static_cast<int>(sp.c_index.cols());
    const double th = x[sp.theta_index];
    ScaPoint pt;
    pt.theta = th / sp.power_unit_W;
    pt.c = Matrix::Zero(M, K);
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < K; ++k) {
            if (sp.c_index(m, k) >= 0) pt.c(m, k) = std::max(0.0, x[sp.c_index(m, k)] / (th * sp.amp(m, k)));
        }
    }
    pt.u.resize(K);
    pt.t.resize(K);
    for (int k = 0; k < K; ++k) {
        pt.u(k) = x[sp.u_index[k]] / th;
        pt.t(k) = x[sp.t_index[k]] / th;
    }
    return pt;
}

Vector scaled_t(const ScaSubproblem& sp, const std::vector<double>& x)
{
    Vector t(sp.t_index.size());
    for (std::size_t k = 0; k < sp.t_index.size(); ++k) t(k) = x[sp.t_index[k]] / sp.power_unit_W;
    return t;
}

}  // namespace cfmimo::conic
