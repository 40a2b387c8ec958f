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
 * @file cones.hpp
 * @brief Cone algebra for the product of a nonnegative orthant and
 *        second-order cones: Jordan products, Nesterov-Todd scaling, step
 *        lengths.
 */
#ifndef CFMIMO_CONIC_CONES_HPP
#define CFMIMO_CONIC_CONES_HPP

#include <Eigen/Dense>

#include <vector>

namespace cfmimo::conic {

using Vec = Eigen::VectorXd;

struct ConeSpec {
    int orthant = 0;
    std::vector<int> soc;  // dimensions, each >= 2

    int dim() const;
    /// Barrier degree: orthant size plus number of SOCs.
    int degree() const { return orthant + static_cast<int>(soc.size()); }
    /// Offset of SOC i in the stacked vector.
    std::vector<int> soc_offsets() const;
};

/// Per-SOC scaling data. W = eta*[[a, q'],[q, I + qq'/(1+a)]] and
/// W^2 = eta^2 * (diag(d0,1,...,1) + u u' - v v') with diag - v v' positive definite.
struct SocScaling {
    double eta = 1.0;
    double a = 1.0;
    Vec q;
    double d0 = 1.0;
    Vec u;
    Vec v;
};

class NtScaling {
public:
    explicit NtScaling(const ConeSpec& spec);

    /// Identity scaling (W = I).
    void set_identity();
    /// Scaling point for interior s, z. Returns false if either is not interior.
    bool update(const Vec& s, const Vec& z);

    void apply_W(const Vec& x, Vec& out) const;
    void apply_Winv(const Vec& x, Vec& out) const;

    const Vec& lambda() const { return lambda_; }
    const Vec& orthant_w2() const { return w2_; }
    const std::vector<SocScaling>& soc() const { return soc_; }
    const ConeSpec& spec() const { return spec_; }

private:
    ConeSpec spec_;
    std::vector<int> offsets_;
    Vec w2_;
    std::vector<SocScaling> soc_;
    Vec lambda_;
};

/// x o y.
void jordan_product(const ConeSpec& spec, const Vec& x, const Vec& y, Vec& out);
/// Solves lambda o out = v (lambda interior).
void jordan_divide(const ConeSpec& spec, const Vec& lambda, const Vec& v, Vec& out);
/// Largest alpha with x + alpha*dx in the cone (x interior); +inf if unbounded.
double max_step(const ConeSpec& spec, const Vec& x, const Vec& dx);
/// Smallest alpha with x + alpha*e in the closed cone (negative for interior points).
double boundary_shift(const ConeSpec& spec, const Vec& x);
/// x += alpha * e.
void add_identity(const ConeSpec& spec, Vec& x, double alpha);
/// Distance-like violation of membership (0 when inside).
double cone_violation(const ConeSpec& spec, const Vec& x);

}  // namespace cfmimo::conic

#endif
