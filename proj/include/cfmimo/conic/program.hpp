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
 * @file program.hpp
 * @brief Second-order cone program intermediate representation.
 *
 * Cone entries are affine expressions of the variables (a sparse linear
 * part plus a constant), which is the form the builders produce directly.
 *
 * Dump format (one record per line):
 *   program <title>
 *   var <index> <name>
 *   objective max <expr>
 *   row <label> <expr> (=|<=) <rhs>
 *   soc <label> dim <d> head <expr> tail <expr> ; <expr> ; ...
 *   rsoc <label> dim <d> heads <expr> ; <expr> tail <expr> ; ...
 * where <expr> is `coef*x<index>` terms joined by `+`, then `+const`.
 */
#ifndef CFMIMO_CONIC_PROGRAM_HPP
#define CFMIMO_CONIC_PROGRAM_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cfmimo::conic {

struct LinExpr {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;

    static LinExpr var(int index, double coef = 1.0);
    static LinExpr constant_value(double v);
    LinExpr& add(int index, double coef);
    LinExpr& add(const LinExpr& other, double scale = 1.0);
    LinExpr& scale(double s);
    double eval(const std::vector<double>& x) const;
};

enum class RowSense { Equal, LessEqual };

struct LinearRow {
    LinExpr expr;
    RowSense sense = RowSense::LessEqual;
    double rhs = 0.0;
    std::string label;
};

enum class ConeKind { SOC, RotatedSOC };

/// SOC: ||tail|| <= heads[0].  Rotated: ||tail||^2 <= 2*heads[0]*heads[1], heads >= 0.
struct Cone {
    ConeKind kind = ConeKind::SOC;
    std::vector<LinExpr> heads;
    std::vector<LinExpr> tail;
    std::string label;
};

struct Violation {
    double linear = 0.0;
    double cone = 0.0;
    double max() const { return linear > cone ? linear : cone; }
};

class ConicProgram {
public:
    explicit ConicProgram(std::string title = "program");

    int add_var(const std::string& name);
    int n_vars() const { return static_cast<int>(names_.size()); }
    const std::string& var_name(int i) const { return names_.at(i); }
    std::optional<int> find_var(const std::string& name) const;

    /// Objective is maximized.
    void set_objective(const LinExpr& obj) { objective_ = obj; }
    const LinExpr& objective() const { return objective_; }

    void add_row(const LinExpr& expr, RowSense sense, double rhs, const std::string& label);
    void add_soc(const LinExpr& head, std::vector<LinExpr> tail, const std::string& label);
    void add_rotated_soc(const LinExpr& a, const LinExpr& b, std::vector<LinExpr> tail,
                         const std::string& label);

    const std::vector<LinearRow>& rows() const { return rows_; }
    const std::vector<Cone>& cones() const { return cones_; }
    const std::string& title() const { return title_; }

    /// Throws std::invalid_argument on out-of-range references.
    void validate() const;

    /// Worst absolute violation of rows and cones at x.
    Violation violation(const std::vector<double>& x) const;
    /// Violation of a single cone at x (0 when satisfied).
    static double cone_violation(const Cone& cone, const std::vector<double>& x);

    std::string dump() const;

private:
    std::string title_;
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_;
    LinExpr objective_;
    std::vector<LinearRow> rows_;
    std::vector<Cone> cones_;
};

}  // namespace cfmimo::conic

#endif
