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
#include "cfmimo/conic/sparse_ldl.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>

#include <stdexcept>

namespace cfmimo::conic {

void SparseLdl::analyze(int n, const std::vector<int>& colptr, const std::vector<int>& rowind)
{
    if (static_cast<int>(colptr.size()) != n + 1) {
        throw std::invalid_argument("SparseLdl::analyze: bad column pointer size");
    }
    n_ = n;
    const int nnz = colptr[n];

    std::vector<Eigen::Triplet<double, int>> trip;
    trip.reserve(nnz + n);
    for (int j = 0; j < n; ++j) {
        trip.emplace_back(j, j, 1.0);
        for (int p = colptr[j]; p < colptr[j + 1]; ++p) trip.emplace_back(rowind[p], j, 1.0);
    }
    Eigen::SparseMatrix<double, Eigen::ColMajor, int> pat(n, n);
    pat.setFromTriplets(trip.begin(), trip.end());
    Eigen::AMDOrdering<int> amd;
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> P;
    amd(pat, P);
    perm_.assign(P.indices().data(), P.indices().data() + n);
    pinv_.assign(n, 0);
    for (int k = 0; k < n; ++k) pinv_[perm_[k]] = k;

    cp_.assign(n + 1, 0);
    for (int j = 0; j < n; ++j) {
        for (int p = colptr[j]; p < colptr[j + 1]; ++p) {
            int a = pinv_[rowind[p]], b = pinv_[j];
            cp_[std::max(a, b) + 1]++;
        }
    }
    for (int j = 0; j < n; ++j) cp_[j + 1] += cp_[j];
    ri_.assign(nnz, 0);
    slot_.assign(nnz, 0);
    std::vector<int> next(cp_.begin(), cp_.end() - 1);
    for (int j = 0; j < n; ++j) {
        for (int p = colptr[j]; p < colptr[j + 1]; ++p) {
            int a = pinv_[rowind[p]], b = pinv_[j];
            int col = std::max(a, b);
            int pos = next[col]++;
            ri_[pos] = std::min(a, b);
            slot_[p] = pos;
        }
    }

    parent_.assign(n, -1);
    flag_.assign(n, 0);
    lnz_.assign(n, 0);
    for (int k = 0; k < n; ++k) {
        flag_[k] = k;
        for (int p = cp_[k]; p < cp_[k + 1]; ++p) {
            int i = ri_[p];
            for (; i < k && flag_[i] != k; i = parent_[i]) {
                if (parent_[i] == -1) parent_[i] = k;
                lnz_[i]++;
                flag_[i] = k;
            }
        }
    }
    lp_.assign(n + 1, 0);
    for (int k = 0; k < n; ++k) lp_[k + 1] = lp_[k] + lnz_[k];
    li_.assign(lp_[n], 0);
    lx_.assign(lp_[n], 0.0);
    d_.assign(n, 0.0);
    ax_.assign(nnz, 0.0);
    y_.assign(n, 0.0);
    pattern_.assign(n, 0);
    work_.assign(n, 0.0);
}

int SparseLdl::factor(const std::vector<double>& values, const std::vector<std::int8_t>& signs,
                      double eps, double delta)
{
    const int n = n_;
    std::fill(ax_.begin(), ax_.end(), 0.0);
    for (std::size_t p = 0; p < values.size(); ++p) ax_[slot_[p]] += values[p];

    int bumped = 0;
    for (int k = 0; k < n; ++k) {
        y_[k] = 0.0;
        int top = n;
        flag_[k] = k;
        lnz_[k] = 0;
        for (int p = cp_[k]; p < cp_[k + 1]; ++p) {
            int i = ri_[p];
            y_[i] += ax_[p];
            int len = 0;
            for (; flag_[i] != k; i = parent_[i]) {
                pattern_[len++] = i;
                flag_[i] = k;
            }
            while (len > 0) pattern_[--top] = pattern_[--len];
        }
        double dk = y_[k];
        y_[k] = 0.0;
        for (; top < n; ++top) {
            int i = pattern_[top];
            double yi = y_[i];
            y_[i] = 0.0;
            int p2 = lp_[i] + lnz_[i];
            for (int p = lp_[i]; p < p2; ++p) y_[li_[p]] -= lx_[p] * yi;
            double lki = yi / d_[i];
            dk -= lki * yi;
            li_[p2] = k;
            lx_[p2] = lki;
            lnz_[i]++;
        }
        double sg = signs[perm_[k]];
        if (sg * dk <= eps) {
            dk = sg * delta;
            ++bumped;
        }
        d_[k] = dk;
    }
    return bumped;
}

void SparseLdl::solve(std::vector<double>& b) const
{
    const int n = n_;
    for (int k = 0; k < n; ++k) work_[k] = b[perm_[k]];
    for (int j = 0; j < n; ++j) {
        double xj = work_[j];
        for (int p = lp_[j]; p < lp_[j + 1]; ++p) work_[li_[p]] -= lx_[p] * xj;
    }
    for (int j = 0; j < n; ++j) work_[j] /= d_[j];
    for (int j = n - 1; j >= 0; --j) {
        double acc = work_[j];
        for (int p = lp_[j]; p < lp_[j + 1]; ++p) acc -= lx_[p] * work_[li_[p]];
        work_[j] = acc;
    }
    for (int k = 0; k < n; ++k) b[perm_[k]] = work_[k];
}

}  // namespace cfmimo::conic
