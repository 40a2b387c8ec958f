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
#include "cfmimo/conic/cones.hpp"

#include <cmath>
#include <limits>

namespace cfmimo::conic {

int ConeSpec::dim() const
{
    int d = orthant;
    for (int q : soc) d += q;
    return d;
}

std::vector<int> ConeSpec::soc_offsets() const
{
    std::vector<int> off(soc.size());
    int o = orthant;
    for (std::size_t i = 0; i < soc.size(); ++i) {
        off[i] = o;
        o += soc[i];
    }
    return off;
}

NtScaling::NtScaling(const ConeSpec& spec)
    : spec_(spec), offsets_(spec.soc_offsets()), w2_(Vec::Ones(spec.orthant)),
      soc_(spec.soc.size()), lambda_(Vec::Zero(spec.dim()))
{
    set_identity();
}

void NtScaling::set_identity()
{
    w2_.setOnes();
    for (std::size_t i = 0; i < soc_.size(); ++i) {
        int d = spec_.soc[i];
        SocScaling& sc = soc_[i];
        sc.eta = 1.0;
        sc.a = 1.0;
        sc.q = Vec::Zero(d - 1);
        sc.d0 = 1.0;
        sc.u = Vec::Zero(d);
        sc.v = Vec::Zero(d);
    }
}

bool NtScaling::update(const Vec& s, const Vec& z)
{
    const int l = spec_.orthant;
    for (int i = 0; i < l; ++i) {
        if (!(s(i) > 0.0) || !(z(i) > 0.0)) return false;
        w2_(i) = s(i) / z(i);
        lambda_(i) = std::sqrt(s(i) * z(i));
    }
    for (std::size_t c = 0; c < soc_.size(); ++c) {
        const int o = offsets_[c];
        const int d = spec_.soc[c];
        double s0 = s(o), z0 = z(o);
        auto s1 = s.segment(o + 1, d - 1);
        auto z1 = z.segment(o + 1, d - 1);
        double sn = s1.norm(), zn = z1.norm();
        double sres = (s0 - sn) * (s0 + sn);
        double zres = (z0 - zn) * (z0 + zn);
        if (!(s0 > 0.0) || !(z0 > 0.0) || !(sres > 0.0) || !(zres > 0.0)) return false;
        double sq = std::sqrt(sres), zq = std::sqrt(zres);
        double dot = (s0 * z0 + s1.dot(z1)) / (sq * zq);
        double g = std::sqrt((1.0 + dot) / 2.0);
        SocScaling& sc = soc_[c];
        sc.a = (s0 / sq + z0 / zq) / (2.0 * g);
        sc.q = (s1 / sq - z1 / zq) / (2.0 * g);
        sc.eta = std::sqrt(sq / zq);

        double qn = sc.q.norm();
        double t = 1.0 + 2.0 * qn * qn;
        double u1 = std::sqrt(t - 1.0 / (2.0 * t));
        double v1 = std::sqrt(1.0 - 1.0 / (2.0 * t));
        sc.d0 = t / (2.0 * t * t - 1.0);
        sc.u.resize(d);
        sc.v.resize(d);
        sc.u(0) = 2.0 * sc.a * qn / u1;
        sc.v(0) = 0.0;
        if (qn > 0.0) {
            sc.u.tail(d - 1) = (u1 / qn) * sc.q;
            sc.v.tail(d - 1) = (v1 / qn) * sc.q;
        } else {
            sc.u.tail(d - 1).setZero();
            sc.v.tail(d - 1).setZero();
        }
    }
    Vec wz(spec_.dim());
    apply_W(z, wz);
    lambda_.tail(lambda_.size() - l) = wz.tail(wz.size() - l);
    return true;
}

void NtScaling::apply_W(const Vec& x, Vec& out) const
{
    out.resize(x.size());
    const int l = spec_.orthant;
    for (int i = 0; i < l; ++i) out(i) = std::sqrt(w2_(i)) * x(i);
    for (std::size_t c = 0; c < soc_.size(); ++c) {
        const int o = offsets_[c];
        const int d = spec_.soc[c];
        const SocScaling& sc = soc_[c];
        double x0 = x(o);
        auto x1 = x.segment(o + 1, d - 1);
        double qx = sc.q.dot(x1);
        out(o) = sc.eta * (sc.a * x0 + qx);
        out.segment(o + 1, d - 1) = sc.eta * (x1 + (x0 + qx / (1.0 + sc.a)) * sc.q);
    }
}

void NtScaling::apply_Winv(const Vec& x, Vec& out) const
{
    out.resize(x.size());
    const int l = spec_.orthant;
    for (int i = 0; i < l; ++i) out(i) = x(i) / std::sqrt(w2_(i));
    for (std::size_t c = 0; c < soc_.size(); ++c) {
        const int o = offsets_[c];
        const int d = spec_.soc[c];
        const SocScaling& sc = soc_[c];
        double x0 = x(o);
        auto x1 = x.segment(o + 1, d - 1);
        double qx = sc.q.dot(x1);
        out(o) = (sc.a * x0 - qx) / sc.eta;
        out.segment(o + 1, d - 1) = (x1 + (-x0 + qx / (1.0 + sc.a)) * sc.q) / sc.eta;
    }
}

void jordan_product(const ConeSpec& spec, const Vec& x, const Vec& y, Vec& out)
{
    out.resize(x.size());
    const int l = spec.orthant;
    out.head(l) = x.head(l).cwiseProduct(y.head(l));
    int o = l;
    for (int d : spec.soc) {
        double x0 = x(o), y0 = y(o);
        out(o) = x.segment(o, d).dot(y.segment(o, d));
        out.segment(o + 1, d - 1) = x0 * y.segment(o + 1, d - 1) + y0 * x.segment(o + 1, d - 1);
        o += d;
    }
}

void jordan_divide(const ConeSpec& spec, const Vec& lambda, const Vec& v, Vec& out)
{
    out.resize(v.size());
    const int l = spec.orthant;
    out.head(l) = v.head(l).cwiseQuotient(lambda.head(l));
    int o = l;
    for (int d : spec.soc) {
        double l0 = lambda(o);
        auto l1 = lambda.segment(o + 1, d - 1);
        double ln = l1.norm();
        double det = (l0 - ln) * (l0 + ln);
        double x0 = (l0 * v(o) - l1.dot(v.segment(o + 1, d - 1))) / det;
        out(o) = x0;
        out.segment(o + 1, d - 1) = (v.segment(o + 1, d - 1) - x0 * l1) / l0;
        o += d;
    }
}

double max_step(const ConeSpec& spec, const Vec& x, const Vec& dx)
{
    double alpha = std::numeric_limits<double>::infinity();
    const int l = spec.orthant;
    for (int i = 0; i < l; ++i) {
        if (dx(i) < 0.0) alpha = std::min(alpha, -x(i) / dx(i));
    }
    int o = l;
    for (int d : spec.soc) {
        double x0 = x(o), d0 = dx(o);
        double xn = x.segment(o + 1, d - 1).norm();
        double dn = dx.segment(o + 1, d - 1).norm();
        double A = (d0 - dn) * (d0 + dn);
        double B = x0 * d0 - x.segment(o + 1, d - 1).dot(dx.segment(o + 1, d - 1));
        double C = (x0 - xn) * (x0 + xn);
        if (C <= 0.0) return 0.0;
        double disc = B * B - A * C;
        if (A < 0.0 || (B < 0.0 && disc >= 0.0)) {
            alpha = std::min(alpha, C / (-B + std::sqrt(std::max(disc, 0.0))));
        }
        o += d;
    }
    return alpha;
}

double boundary_shift(const ConeSpec& spec, const Vec& x)
{
    double shift = -std::numeric_limits<double>::infinity();
    const int l = spec.orthant;
    for (int i = 0; i < l; ++i) shift = std::max(shift, -x(i));
    int o = l;
    for (int d : spec.soc) {
        shift = std::max(shift, x.segment(o + 1, d - 1).norm() - x(o));
        o += d;
    }
    return shift;
}

void add_identity(const ConeSpec& spec, Vec& x, double alpha)
{
    const int l = spec.orthant;
    x.head(l).array() += alpha;
    int o = l;
    for (int d : spec.soc) {
        x(o) += alpha;
        o += d;
    }
}

double cone_violation(const ConeSpec& spec, const Vec& x)
{
    return std::max(0.0, boundary_shift(spec, x));
}

}  // namespace cfmimo::conic
