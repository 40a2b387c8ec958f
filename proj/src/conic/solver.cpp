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
#include "cfmimo/conic/solver.hpp"
#include "cfmimo/conic/cones.hpp"
#include "cfmimo/conic/sparse_ldl.hpp"

#include <Eigen/SparseCore>

#include <cmath>
#include <cstdio>
#include <limits>

namespace cfmimo::conic {

const char* to_string(SolverStatus s)
{
    switch (s) {
    case SolverStatus::Optimal: return "optimal";
    case SolverStatus::Infeasible: return "infeasible";
    case SolverStatus::MaxIterations: return "max_iterations";
    case SolverStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using SpRow = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Trip = Eigen::Triplet<double, int>;

constexpr double kStaticReg = 7e-8;
constexpr double kPivotEps = 1e-13;
constexpr double kDynamicReg = 7e-8;
constexpr double kStepFraction = 0.99;
constexpr double kSigmaMin = 1e-4;
constexpr int kMaxRefine = 12;

// min c'x  s.t.  Ax = b,  h - Gx in K.
struct StandardForm {
    int n = 0;
    SpMat A, G;
    Vec c, b, h;
    ConeSpec cones;
    double obj_const = 0.0;
};

void push_row(std::vector<Trip>& trip, int row, const LinExpr& e, double sign)
{
    for (const auto& [j, a] : e.terms) {
        if (a != 0.0) trip.emplace_back(row, j, sign * a);
    }
}

StandardForm to_standard(const ConicProgram& prog)
{
    StandardForm sf;
    sf.n = prog.n_vars();
    sf.c = Vec::Zero(sf.n);
    for (const auto& [j, a] : prog.objective().terms) sf.c(j) -= a;
    sf.obj_const = prog.objective().constant;

    std::vector<Trip> ta, tg;
    std::vector<double> b, h;
    for (const auto& r : prog.rows()) {
        if (r.sense != RowSense::Equal) continue;
        push_row(ta, static_cast<int>(b.size()), r.expr, 1.0);
        b.push_back(r.rhs - r.expr.constant);
    }
    // Orthant rows: inequalities and degenerate cones.
    auto orthant = [&](const LinExpr& e) {  // e(x) >= 0
        push_row(tg, static_cast<int>(h.size()), e, -1.0);
        h.push_back(e.constant);
    };
    for (const auto& r : prog.rows()) {
        if (r.sense != RowSense::LessEqual) continue;
        push_row(tg, static_cast<int>(h.size()), r.expr, 1.0);
        h.push_back(r.rhs - r.expr.constant);
    }
    for (const auto& cone : prog.cones()) {
        if (!cone.tail.empty()) continue;
        for (const auto& hd : cone.heads) orthant(hd);
    }
    sf.cones.orthant = static_cast<int>(h.size());
    const double r2 = 1.0 / std::sqrt(2.0);
    for (const auto& cone : prog.cones()) {
        if (cone.tail.empty()) continue;
        std::vector<LinExpr> entries;
        if (cone.kind == ConeKind::SOC) {
            entries.push_back(cone.heads[0]);
        } else {
            LinExpr plus = cone.heads[0], minus = cone.heads[0];
            plus.add(cone.heads[1], 1.0).scale(r2);
            minus.add(cone.heads[1], -1.0).scale(r2);
            entries.push_back(plus);
            entries.push_back(minus);
        }
        entries.insert(entries.end(), cone.tail.begin(), cone.tail.end());
        for (const auto& e : entries) orthant(e);
        sf.cones.soc.push_back(static_cast<int>(entries.size()));
    }
    sf.A.resize(static_cast<int>(b.size()), sf.n);
    sf.A.setFromTriplets(ta.begin(), ta.end());
    sf.G.resize(static_cast<int>(h.size()), sf.n);
    sf.G.setFromTriplets(tg.begin(), tg.end());
    sf.b = Eigen::Map<Vec>(b.data(), static_cast<Eigen::Index>(b.size()));
    sf.h = Eigen::Map<Vec>(h.data(), static_cast<Eigen::Index>(h.size()));
    return sf;
}

// Ruiz equilibration with a common row scale per cone block.
struct Scaling {
    Vec E, DA, DG;
    double cost = 1.0;
};

Scaling equilibrate(StandardForm& sf, int passes)
{
    Scaling sc;
    const int n = sf.n;
    const int p = static_cast<int>(sf.A.rows());
    const int m = static_cast<int>(sf.G.rows());
    sc.E = Vec::Ones(n);
    sc.DA = Vec::Ones(p);
    sc.DG = Vec::Ones(m);
    const auto offs = sf.cones.soc_offsets();
    auto inv_sqrt = [](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 1.0; };
    for (int pass = 0; pass < passes; ++pass) {
        Vec colmax = Vec::Zero(n), rowA = Vec::Zero(p), rowG = Vec::Zero(m);
        for (int j = 0; j < n; ++j) {
            for (SpMat::InnerIterator it(sf.A, j); it; ++it) {
                double a = std::fabs(it.value());
                colmax(j) = std::max(colmax(j), a);
                rowA(it.row()) = std::max(rowA(it.row()), a);
            }
            for (SpMat::InnerIterator it(sf.G, j); it; ++it) {
                double a = std::fabs(it.value());
                colmax(j) = std::max(colmax(j), a);
                rowG(it.row()) = std::max(rowG(it.row()), a);
            }
        }
        for (std::size_t c = 0; c < offs.size(); ++c) {
            double mx = rowG.segment(offs[c], sf.cones.soc[c]).maxCoeff();
            rowG.segment(offs[c], sf.cones.soc[c]).setConstant(mx);
        }
        Vec e(n), da(p), dg(m);
        for (int j = 0; j < n; ++j) e(j) = inv_sqrt(colmax(j));
        for (int i = 0; i < p; ++i) da(i) = inv_sqrt(rowA(i));
        for (int i = 0; i < m; ++i) dg(i) = inv_sqrt(rowG(i));
        sf.A = da.asDiagonal() * sf.A * e.asDiagonal();
        sf.G = dg.asDiagonal() * sf.G * e.asDiagonal();
        sc.E.array() *= e.array();
        sc.DA.array() *= da.array();
        sc.DG.array() *= dg.array();
    }
    sf.c = sc.E.cwiseProduct(sf.c);
    sf.b = sc.DA.cwiseProduct(sf.b);
    sf.h = sc.DG.cwiseProduct(sf.h);
    double cmax = sf.c.size() ? sf.c.cwiseAbs().maxCoeff() : 0.0;
    if (cmax > 0.0) {
        sc.cost = cmax;
        sf.c /= cmax;
    }
    return sc;
}

// Expanded quasi-definite KKT system:
//   [ reg     A'    G'         0      ]
//   [ A      -reg                      ]
//   [ G            -W2diag-reg  lifted ]
//   [ 0             lifted'     +-1    ]
class Kkt {
public:
    Kkt(const StandardForm& sf) : sf_(sf)
    {
        n_ = sf.n;
        p_ = static_cast<int>(sf.A.rows());
        m_ = static_cast<int>(sf.G.rows());
        nsoc_ = static_cast<int>(sf.cones.soc.size());
        dim_ = n_ + p_ + m_ + 2 * nsoc_;
        offsets_ = sf.cones.soc_offsets();
        build_pattern();
    }

    int dim() const { return dim_; }
    double refine_error() const { return last_err_; }

    void assemble(const NtScaling& W)
    {
        values_ = base_;
        const int l = sf_.cones.orthant;
        const Vec& w2 = W.orthant_w2();
        for (int i = 0; i < l; ++i) values_[zdiag_[i]] = -w2(i) - kStaticReg;
        const auto& soc = W.soc();
        for (int c = 0; c < nsoc_; ++c) {
            const SocScaling& sc = soc[c];
            const int o = offsets_[c];
            const int d = sf_.cones.soc[c];
            double e2 = sc.eta * sc.eta;
            values_[zdiag_[o]] = -e2 * sc.d0 - kStaticReg;
            for (int t = 1; t < d; ++t) values_[zdiag_[o + t]] = -e2 - kStaticReg;
            for (int t = 1; t < d; ++t) values_[vpos_[c] + t - 1] = sc.eta * sc.v(t);
            values_[vdiag_[c]] = -1.0;
            for (int t = 0; t < d; ++t) values_[upos_[c] + t] = sc.eta * sc.u(t);
            values_[udiag_[c]] = 1.0;
        }
    }

    int factor() { return ldl_.factor(values_, signs_, kPivotEps, kDynamicReg); }

    // Solves the unregularized system via refinement. rhs has size n+p+m.
    bool solve(const Vec& rx, const Vec& ry, const Vec& rz, Vec& dx, Vec& dy, Vec& dz)
    {
        std::vector<double> rhs(dim_, 0.0), sol(dim_), res(dim_), corr(dim_);
        for (int i = 0; i < n_; ++i) rhs[i] = rx(i);
        for (int i = 0; i < p_; ++i) rhs[n_ + i] = ry(i);
        for (int i = 0; i < m_; ++i) rhs[n_ + p_ + i] = rz(i);
        double bnorm = 0.0;
        for (double v : rhs) bnorm = std::max(bnorm, std::fabs(v));
        sol = rhs;
        ldl_.solve(sol);
        double prev = std::numeric_limits<double>::infinity();
        for (int it = 0; it < kMaxRefine; ++it) {
            true_matvec(sol, res);
            double err = 0.0;
            for (int i = 0; i < dim_; ++i) {
                res[i] = rhs[i] - res[i];
                err = std::max(err, std::fabs(res[i]));
            }
            if (!std::isfinite(err)) return false;
            last_err_ = err / (1.0 + bnorm);
            if (err <= 1e-14 * (1.0 + bnorm)) break;
            if (err > 0.5 * prev) break;
            prev = err;
            corr = res;
            ldl_.solve(corr);
            for (int i = 0; i < dim_; ++i) sol[i] += corr[i];
        }
        dx.resize(n_);
        dy.resize(p_);
        dz.resize(m_);
        for (int i = 0; i < n_; ++i) dx(i) = sol[i];
        for (int i = 0; i < p_; ++i) dy(i) = sol[n_ + i];
        for (int i = 0; i < m_; ++i) dz(i) = sol[n_ + p_ + i];
        return dx.allFinite() && dy.allFinite() && dz.allFinite();
    }

private:
    void build_pattern()
    {
        SpRow Ar = sf_.A;
        SpRow Gr = sf_.G;
        colptr_.assign(dim_ + 1, 0);
        rowind_.clear();
        base_.clear();
        sreg_.assign(dim_, 0.0);
        signs_.assign(dim_, 1);
        auto push = [&](int row, double v) {
            rowind_.push_back(row);
            base_.push_back(v);
            return static_cast<int>(rowind_.size()) - 1;
        };
        int col = 0;
        for (int j = 0; j < n_; ++j, ++col) {
            push(j, kStaticReg);
            sreg_[col] = kStaticReg;
            signs_[col] = 1;
            colptr_[col + 1] = static_cast<int>(rowind_.size());
        }
        for (int i = 0; i < p_; ++i, ++col) {
            for (SpRow::InnerIterator it(Ar, i); it; ++it) push(it.col(), it.value());
            push(col, -kStaticReg);
            sreg_[col] = -kStaticReg;
            signs_[col] = -1;
            colptr_[col + 1] = static_cast<int>(rowind_.size());
        }
        zdiag_.assign(m_, 0);
        for (int i = 0; i < m_; ++i, ++col) {
            for (SpRow::InnerIterator it(Gr, i); it; ++it) push(it.col(), it.value());
            zdiag_[i] = push(col, -1.0 - kStaticReg);
            sreg_[col] = -kStaticReg;
            signs_[col] = -1;
            colptr_[col + 1] = static_cast<int>(rowind_.size());
        }
        vpos_.assign(nsoc_, 0);
        vdiag_.assign(nsoc_, 0);
        upos_.assign(nsoc_, 0);
        udiag_.assign(nsoc_, 0);
        const int zbase = n_ + p_;
        for (int c = 0; c < nsoc_; ++c) {
            const int o = offsets_[c];
            const int d = sf_.cones.soc[c];
            vpos_[c] = static_cast<int>(rowind_.size());
            for (int t = 1; t < d; ++t) push(zbase + o + t, 0.0);
            vdiag_[c] = push(col, -1.0);
            signs_[col] = -1;
            colptr_[col + 1] = static_cast<int>(rowind_.size());
            ++col;
            upos_[c] = static_cast<int>(rowind_.size());
            for (int t = 0; t < d; ++t) push(zbase + o + t, 0.0);
            udiag_[c] = push(col, 1.0);
            signs_[col] = 1;
            colptr_[col + 1] = static_cast<int>(rowind_.size());
            ++col;
        }
        ldl_.analyze(dim_, colptr_, rowind_);
    }

    void true_matvec(const std::vector<double>& x, std::vector<double>& y) const
    {
        std::fill(y.begin(), y.end(), 0.0);
        for (int j = 0; j < dim_; ++j) {
            for (int p = colptr_[j]; p < colptr_[j + 1]; ++p) {
                int i = rowind_[p];
                double v = values_[p];
                y[i] += v * x[j];
                if (i != j) y[j] += v * x[i];
            }
        }
        for (int j = 0; j < dim_; ++j) y[j] -= sreg_[j] * x[j];
    }

    const StandardForm& sf_;
    int n_ = 0, p_ = 0, m_ = 0, nsoc_ = 0, dim_ = 0;
    std::vector<int> offsets_;
    std::vector<int> colptr_, rowind_;
    std::vector<double> base_, values_, sreg_;
    std::vector<std::int8_t> signs_;
    std::vector<int> zdiag_, vpos_, vdiag_, upos_, udiag_;
    SparseLdl ldl_;
    double last_err_ = 0.0;
};

double norm2(const Vec& v) { return v.size() ? v.norm() : 0.0; }

}  // namespace

SolverResult solve(const ConicProgram& prog, double feas_tol, double cone_tol, int max_iters)
{
    SolverOptions o;
    o.feas_tol = feas_tol;
    o.cone_tol = cone_tol;
    o.max_iters = max_iters;
    return solve(prog, o);
}

SolverResult solve(const ConicProgram& prog, const SolverOptions& opts)
{
    prog.validate();
    StandardForm sf = to_standard(prog);
    const Scaling eq = equilibrate(sf, opts.equilibration_passes);
    const int n = sf.n;
    const int p = static_cast<int>(sf.A.rows());
    const int m = static_cast<int>(sf.G.rows());
    const ConeSpec& K = sf.cones;
    const double degree = K.degree() + 1.0;
    const SpMat At = sf.A.transpose();
    const SpMat Gt = sf.G.transpose();
    const double nb = norm2(sf.b), nh = norm2(sf.h), nc = norm2(sf.c);

    SolverResult res;
    Kkt kkt(sf);
    NtScaling W(K);

    // Initial point from two least-squares-like solves with W = I.
    Vec x(n), y(p), z(m), s(m);
    {
        W.set_identity();
        kkt.assemble(W);
        kkt.factor();
        Vec dx, dy, dz;
        if (!kkt.solve(Vec::Zero(n), sf.b, sf.h, dx, dy, dz)) {
            res.detail = "initial solve failed";
            return res;
        }
        x = dx;
        s = -dz;
        double shift = boundary_shift(K, s);
        if (shift >= 0.0) add_identity(K, s, 1.0 + shift);
        if (!kkt.solve(-sf.c, Vec::Zero(p), Vec::Zero(m), dx, dy, dz)) {
            res.detail = "initial solve failed";
            return res;
        }
        y = dy;
        z = dz;
        shift = boundary_shift(K, z);
        if (shift >= 0.0) add_identity(K, z, 1.0 + shift);
    }
    double tau = 1.0, kappa = 1.0;

    Vec rx(n), ry(p), rz(m);
    Vec x1, y1, z1, x0, y0, z0, ds, tmp, tmp2, dsx, dzw, dS, dZ;
    SolverStatus status = SolverStatus::MaxIterations;
    int iter = 0;
    double pres = 0.0, dres = 0.0, gap = 0.0, cres = 0.0;
    auto cone_residual = [&]() {
        Vec r = sf.h - sf.G * (x / tau);
        double denom = std::max(1.0, nh + norm2(x) / tau + norm2(s) / tau);
        return cone_violation(K, r) / denom;
    };
    for (iter = 0; iter <= opts.max_iters; ++iter) {
        rx = At * y + Gt * z + sf.c * tau;
        ry = sf.A * x - sf.b * tau;
        rz = sf.G * x + s - sf.h * tau;
        const double cx = sf.c.dot(x), by = sf.b.dot(y), hz = sf.h.dot(z);
        const double rt = kappa + cx + by + hz;
        const double nx = norm2(x), ny = norm2(y), nz = norm2(z), ns = norm2(s);
        pres = std::max(norm2(ry) / tau / std::max(1.0, nb + nx / tau),
                        norm2(rz) / tau / std::max(1.0, nh + nx / tau + ns / tau));
        dres = norm2(rx) / tau / std::max(1.0, nc + ny / tau + nz / tau);
        const double pcost = cx / tau, dcost = -(hz + by) / tau;
        gap = s.dot(z) / (tau * tau);
        double relgap = std::numeric_limits<double>::infinity();
        if (pcost < 0.0) {
            relgap = gap / -pcost;
        } else if (dcost > 0.0) {
            relgap = gap / dcost;
        }
        if (opts.verbose) {
            std::fprintf(stderr, "it %3d pcost %+.6e dcost %+.6e gap %.2e pres %.2e dres %.2e k/t %.2e\n",
                         iter, pcost, dcost, gap, pres, dres, kappa / tau);
        }
        if (pres < opts.feas_tol && dres < opts.feas_tol &&
            (gap < opts.gap_abs_tol || relgap < opts.gap_rel_tol)) {
            cres = cone_residual();
            if (cres <= opts.cone_tol) {
                status = SolverStatus::Optimal;
                break;
            }
        }
        if (hz + by < 0.0) {
            double certificate = norm2(At * y + Gt * z) / -(hz + by);
            if (certificate < opts.feas_tol) {
                status = SolverStatus::Infeasible;
                break;
            }
        }
        if (cx < 0.0) {
            double ray = std::max(norm2(sf.A * x), norm2(sf.G * x + s)) / -cx;
            if (ray < opts.feas_tol) {
                status = SolverStatus::NumericalFailure;
                res.detail = "dual infeasible (unbounded objective)";
                break;
            }
        }
        if (iter == opts.max_iters) break;

        if (!W.update(s, z)) {
            status = SolverStatus::NumericalFailure;
            res.detail = "iterate left the cone";
            break;
        }
        kkt.assemble(W);
        kkt.factor();
        if (!kkt.solve(-sf.c, sf.b, sf.h, x1, y1, z1)) {
            status = SolverStatus::NumericalFailure;
            res.detail = "KKT solve failed";
            break;
        }
        const Vec& lam = W.lambda();
        const double mu = (s.dot(z) + tau * kappa) / degree;
        const double den = sf.c.dot(x1) + sf.b.dot(y1) + sf.h.dot(z1) - kappa / tau;

        // Direction for a given (sigma, ds, dkappa).
        double dtau = 0.0, dkap = 0.0;
        auto direction = [&](double sigma, const Vec& dsv, double dk, Vec& DX, Vec& DY, Vec& DZ,
                             Vec& DS) {
            jordan_divide(K, lam, dsv, tmp);
            W.apply_W(tmp, tmp2);
            if (!kkt.solve(-(1.0 - sigma) * rx, -(1.0 - sigma) * ry, -(1.0 - sigma) * rz - tmp2,
                           x0, y0, z0)) {
                return false;
            }
            dtau = (-(1.0 - sigma) * rt - dk / tau -
                    (sf.c.dot(x0) + sf.b.dot(y0) + sf.h.dot(z0))) / den;
            DX = x0 + dtau * x1;
            DY = y0 + dtau * y1;
            DZ = z0 + dtau * z1;
            W.apply_W(DZ, tmp2);
            tmp -= tmp2;
            W.apply_W(tmp, DS);
            dkap = (dk - kappa * dtau) / tau;
            return std::isfinite(dtau) && std::isfinite(dkap);
        };
        auto step_length = [&](const Vec& DS, const Vec& DZ, double dt, double dk) {
            double a = std::min(max_step(K, s, DS), max_step(K, z, DZ));
            if (dt < 0.0) a = std::min(a, -tau / dt);
            if (dk < 0.0) a = std::min(a, -kappa / dk);
            return a;
        };

        // Predictor.
        Vec dsa;
        jordan_product(K, lam, lam, dsa);
        dsa = -dsa;
        Vec DXa, DYa, DZa, DSa;
        if (!direction(0.0, dsa, -tau * kappa, DXa, DYa, DZa, DSa)) {
            status = SolverStatus::NumericalFailure;
            res.detail = "KKT solve failed";
            break;
        }
        const double dtau_a = dtau, dkap_a = dkap;
        double alpha_a = std::min(1.0, step_length(DSa, DZa, dtau_a, dkap_a));
        double sigma = std::pow(1.0 - alpha_a, 3);
        sigma = std::min(1.0, std::max(kSigmaMin, sigma));

        // Corrector.
        W.apply_Winv(DSa, dsx);
        W.apply_W(DZa, dzw);
        jordan_product(K, dsx, dzw, ds);
        ds = dsa - ds;
        add_identity(K, ds, sigma * mu);
        const double dk = -tau * kappa - dtau_a * dkap_a + sigma * mu;
        Vec DX, DY, DZ, DS;
        if (!direction(sigma, ds, dk, DX, DY, DZ, DS)) {
            status = SolverStatus::NumericalFailure;
            res.detail = "KKT solve failed";
            break;
        }
        double alpha = std::min(1.0, kStepFraction * step_length(DS, DZ, dtau, dkap));
        if (opts.verbose) {
            std::fprintf(stderr, "    step %.3e affine %.3e sigma %.2e refine %.2e\n", alpha, alpha_a,
                         sigma, kkt.refine_error());
        }
        if (!(alpha > 1e-10)) {
            status = SolverStatus::NumericalFailure;
            res.detail = "step length collapsed";
            break;
        }
        x += alpha * DX;
        y += alpha * DY;
        z += alpha * DZ;
        s += alpha * DS;
        tau += alpha * dtau;
        kappa += alpha * dkap;
        if (!(tau > 0.0) || !(kappa > 0.0) || !x.allFinite()) {
            status = SolverStatus::NumericalFailure;
            res.detail = "iterate diverged";
            break;
        }
    }
    if (status == SolverStatus::MaxIterations && res.detail.empty()) {
        res.detail = "iteration limit";
    }

    res.status = status;
    res.iterations = iter;
    res.primal_residual = pres;
    res.dual_residual = dres;
    res.gap = gap;
    if (status == SolverStatus::Infeasible) {
        res.cone_residual = 0.0;
        res.objective = std::numeric_limits<double>::quiet_NaN();
        return res;
    }
    res.cone_residual = cone_residual();
    Vec xo = eq.E.cwiseProduct(x) / tau;
    res.x.assign(xo.data(), xo.data() + n);
    res.objective = prog.objective().eval(res.x);
    return res;
}

}  // namespace cfmimo::conic
