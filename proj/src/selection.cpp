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
#include "cfmimo/selection.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace cfmimo {

std::vector<std::vector<int>> transpose_sets(const std::vector<std::vector<int>>& sets, int other)
{
    std::vector<std::vector<int>> out(other);
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (int j : sets[i]) {
            if (j < 0 || j >= other) throw std::out_of_range("transpose_sets: index out of range");
            out[j].push_back(static_cast<int>(i));
        }
    }
    return out;
}

SelectionResult SelectionResult::from_serving_sets(const ChannelStats& stats,
                                                   std::vector<std::vector<int>> sets)
{
    const int M = stats.M(), K = stats.K();
    if (static_cast<int>(sets.size()) != K) {
        throw std::invalid_argument("serving sets: expected one set per user");
    }
    SelectionResult r;
    for (auto& s : sets) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    r.served_users = transpose_sets(sets, M);
    r.serving_sets = std::move(sets);
    r.gamma_hat = Matrix::Zero(M, K);
    for (int k = 0; k < K; ++k) {
        for (int m : r.serving_sets[k]) r.gamma_hat(m, k) = stats.gamma(m, k);
    }
    return r;
}

SelectionResult SelectionResult::full(const ChannelStats& stats)
{
    std::vector<int> all(stats.M());
    std::iota(all.begin(), all.end(), 0);
    return from_serving_sets(stats, std::vector<std::vector<int>>(stats.K(), all));
}

BoolMatrix SelectionResult::mask() const
{
    BoolMatrix b = BoolMatrix::Constant(static_cast<Eigen::Index>(served_users.size()),
                                        static_cast<Eigen::Index>(serving_sets.size()), false);
    for (std::size_t k = 0; k < serving_sets.size(); ++k) {
        for (int m : serving_sets[k]) b(m, static_cast<Eigen::Index>(k)) = true;
    }
    return b;
}

double SelectionResult::mean_fraction() const
{
    if (serving_sets.empty() || served_users.empty()) return 0.0;
    double s = 0.0;
    for (const auto& a : serving_sets) s += static_cast<double>(a.size());
    return s / (static_cast<double>(serving_sets.size()) * static_cast<double>(served_users.size()));
}

Matrix contribution_fractions(const PowerAllocation& alloc, const ChannelStats& stats)
{
    const int M = stats.M(), K = stats.K();
    if (alloc.M() != M || alloc.K() != K) {
        throw std::invalid_argument("contribution_fractions: dimension mismatch");
    }
    Matrix p(M, K);
    for (int k = 0; k < K; ++k) {
        CompensatedSum total;
        for (int m = 0; m < M; ++m) {
            p(m, k) = std::sqrt(std::max(0.0, alloc.eta(m, k))) * stats.gamma(m, k);
            total.add(p(m, k));
        }
        if (!(total.value() > 0.0)) {
            throw std::domain_error("contribution_fractions: user " + std::to_string(k) +
                                    " receives no power");
        }
        p.col(k) /= total.value();
    }
    return p;
}

std::vector<int> smallest_prefix(const Vector& shares, double delta_pct)
{
    if (!(delta_pct > 0.0 && delta_pct <= 100.0)) {
        throw std::invalid_argument("delta_pct: must be in (0, 100]");
    }
    const int n = static_cast<int>(shares.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return shares(a) > shares(b); });
    std::vector<int> out;
    if (delta_pct >= 100.0) {
        for (int i : order) {
            if (shares(i) > 0.0) out.push_back(i);
        }
    } else {
        const double total = shares.sum();
        // Relative slack so uniform shares such as 19 x 0.05 reach 95%.
        const double goal = total * (delta_pct / 100.0) * (1.0 - 1e-12);
        CompensatedSum acc;
        for (int i : order) {
            if (acc.value() >= goal) break;
            acc.add(shares(i));
            out.push_back(i);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

SelectionResult select_received_power(const PowerAllocation& alloc_opt, const ChannelStats& stats,
                                      double delta_pct)
{
    const Matrix p = contribution_fractions(alloc_opt, stats);
    std::vector<std::vector<int>> sets(stats.K());
    for (int k = 0; k < stats.K(); ++k) sets[k] = smallest_prefix(p.col(k), delta_pct);
    return SelectionResult::from_serving_sets(stats, std::move(sets));
}

SelectionResult select_largest_beta(const ChannelStats& stats, double delta_pct)
{
    std::vector<std::vector<int>> sets(stats.K());
    for (int k = 0; k < stats.K(); ++k) sets[k] = smallest_prefix(stats.beta.col(k), delta_pct);
    return SelectionResult::from_serving_sets(stats, std::move(sets));
}

const char* to_string(SelectionScheme s)
{
    return s == SelectionScheme::ReceivedPower ? "received_power" : "largest_beta";
}

SelectionOutcome optimize_with_selection(const ChannelStats& stats, const PowerParams& params,
                                         const std::vector<double>& targets,
                                         SelectionScheme scheme, double delta_pct,
                                         const ScaOptions& opts)
{
    SelectionOutcome out;
    if (scheme == SelectionScheme::ReceivedPower) {
        out.initial_alloc = run(stats, params, targets, out.initial_state, opts);
        const PowerAllocation& full = out.initial_alloc;
        if (!out.initial_state.has_allocation()) {
            out.state = out.initial_state;
            out.alloc = PowerAllocation::infeasible_sentinel(stats.M(), stats.K());
            out.selection = SelectionResult::full(stats);
            out.report = evaluate(stats, params, out.alloc);
            return out;
        }
        const SelectionResult fallback = select_largest_beta(stats, delta_pct);
        std::vector<std::vector<int>> sets(stats.K());
        for (int k = 0; k < stats.K(); ++k) {
            Vector share(stats.M());
            for (int m = 0; m < stats.M(); ++m) {
                share(m) = std::sqrt(std::max(0.0, full.eta(m, k))) * stats.gamma(m, k);
            }
            sets[k] = share.sum() > 0.0 ? smallest_prefix(share, delta_pct) : fallback.serving_sets[k];
        }
        out.selection = SelectionResult::from_serving_sets(stats, std::move(sets));
    } else {
        out.selection = select_largest_beta(stats, delta_pct);
    }
    const BoolMatrix mask = out.selection.mask();
    out.alloc = run(stats, params, targets, out.state, opts, &mask);
    if (!out.state.has_allocation()) {
        out.alloc = PowerAllocation::infeasible_sentinel(stats.M(), stats.K());
        out.alloc.mask = mask;
    }
    out.report = evaluate(stats, params, out.alloc);
    return out;
}

PowerAllocation equal_power(const ChannelStats& stats, EqualPowerScheme scheme)
{
    const int M = stats.M(), K = stats.K();
    PowerAllocation a = PowerAllocation::zeros(M, K);
    for (int m = 0; m < M; ++m) {
        const double row = stats.gamma.row(m).sum();
        for (int k = 0; k < K; ++k) {
            if (!(stats.gamma(m, k) > 0.0)) continue;
            a.eta(m, k) = scheme == EqualPowerScheme::I ? 1.0 / (stats.N * K * stats.gamma(m, k))
                                                        : 1.0 / (stats.N * row);
        }
    }
    return a;
}

SystemConfig colocated_config(const SystemConfig& cfg)
{
    SystemConfig out = cfg;
    out.N = cfg.M * cfg.N;
    out.M = 1;
    out.ap_layout = ApLayout::Center;
    return out;
}

void write_serving_sets(std::ostream& os, const SelectionResult& sel)
{
    os << "cfmimo-serving-sets 1\n" << sel.served_users.size() << ' ' << sel.serving_sets.size() << '\n';
    for (std::size_t k = 0; k < sel.serving_sets.size(); ++k) {
        os << k << ' ' << sel.serving_sets[k].size();
        for (int m : sel.serving_sets[k]) os << ' ' << m;
        os << '\n';
    }
}

std::vector<std::vector<int>> read_serving_sets(std::istream& is, int& M)
{
    std::string magic;
    int version = 0, K = 0;
    if (!(is >> magic >> version) || magic != "cfmimo-serving-sets" || version != 1) {
        throw std::runtime_error("serving sets: bad header");
    }
    if (!(is >> M >> K) || M < 0 || K < 0) throw std::runtime_error("serving sets: bad dimensions");
    std::vector<std::vector<int>> sets(K);
    for (int k = 0; k < K; ++k) {
        int idx = 0, n = 0;
        if (!(is >> idx >> n) || idx != k || n < 0 || n > M) {
            throw std::runtime_error("serving sets: bad entry for user " + std::to_string(k));
        }
        sets[k].resize(n);
        for (int& m : sets[k]) {
            if (!(is >> m) || m < 0 || m >= M) {
                throw std::runtime_error("serving sets: bad AP index for user " + std::to_string(k));
            }
        }
    }
    return sets;
}

}  // namespace cfmimo
