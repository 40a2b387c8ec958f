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
 * @file sparse_ldl.hpp
 * @brief Sparse LDL' factorization of symmetric quasi-definite matrices with
 *        a fill-reducing ordering and sign-guided dynamic regularization.
 */
#ifndef CFMIMO_CONIC_SPARSE_LDL_HPP
#define CFMIMO_CONIC_SPARSE_LDL_HPP

#include <cstdint>
#include <vector>

namespace cfmimo::conic {

class SparseLdl {
public:
    /// Pattern of the upper triangle (row <= col) in CSC form. Duplicate
    /// entries are summed. The pattern stays fixed across factorizations.
    void analyze(int n, const std::vector<int>& colptr, const std::vector<int>& rowind);

    /// Factors the matrix with `values` laid out like the analyzed pattern.
    /// A pivot whose sign disagrees with `signs` (or is below eps in
    /// magnitude) is replaced by sign*delta. Returns the number of such pivots.
    int factor(const std::vector<double>& values, const std::vector<std::int8_t>& signs,
               double eps, double delta);

    /// Solves in place with the last factorization.
    void solve(std::vector<double>& b) const;

    int size() const { return n_; }
    long long factor_nnz() const { return lp_.empty() ? 0 : lp_.back(); }
    const std::vector<int>& permutation() const { return perm_; }

private:
    int n_ = 0;
    std::vector<int> perm_;   // perm_[new] = old
    std::vector<int> pinv_;   // pinv_[old] = new
    std::vector<int> cp_;     // permuted upper CSC
    std::vector<int> ri_;
    std::vector<int> slot_;   // original entry -> permuted position
    std::vector<int> parent_;
    std::vector<int> lp_;
    std::vector<int> li_;
    std::vector<double> lx_;
    std::vector<double> d_;
    mutable std::vector<double> ax_;
    mutable std::vector<double> y_;
    mutable std::vector<int> pattern_;
    mutable std::vector<int> flag_;
    mutable std::vector<int> lnz_;
    mutable std::vector<double> work_;
};

}  // namespace cfmimo::conic

#endif
