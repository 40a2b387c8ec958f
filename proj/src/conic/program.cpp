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
#include "cfmimo/conic/program.hpp"
#include "cfmimo/serialize.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cfmimo::conic {

LinExpr LinExpr::var(int index, double coef)
{
    LinExpr e;
    e.terms.emplace_back(index, coef);
    return e;
}

LinExpr LinExpr::constant_value(double v)
{
    LinExpr e;
    e.constant = v;
    return e;
}

LinExpr& LinExpr::add(int index, double coef)
{
    terms.emplace_back(index, coef);
    return *this;
}

LinExpr& LinExpr::add(const LinExpr& other, double s)
{
    for (const auto& [i, a] : other.terms) terms.emplace_back(i, a * s);
    constant += s * other.constant;
    return *this;
}

LinExpr& LinExpr::scale(double s)
{
    for (auto& t : terms) t.second *= s;
    constant *= s;
    return *this;
}

double LinExpr::eval(const std::vector<double>& x) const
{
    double v = constant;
    for (const auto& [i, a] : terms) v += a * x.at(i);
    return v;
}

ConicProgram::ConicProgram(std::string title) : title_(std::move(title)) {}

int ConicProgram::add_var(const std::string& name)
{
    if (index_.count(name)) {
        throw std::invalid_argument("duplicate variable name: " + name);
    }
    int i = n_vars();
    names_.push_back(name);
    index_.emplace(name, i);
    return i;
}

std::optional<int> ConicProgram::find_var(const std::string& name) const
{
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void ConicProgram::add_row(const LinExpr& expr, RowSense sense, double rhs,
                           const std::string& label)
{
    rows_.push_back({expr, sense, rhs, label});
}

void ConicProgram::add_soc(const LinExpr& head, std::vector<LinExpr> tail,
                           const std::string& label)
{
    cones_.push_back({ConeKind::SOC, {head}, std::move(tail), label});
}

void ConicProgram::add_rotated_soc(const LinExpr& a, const LinExpr& b, std::vector<LinExpr> tail,
                                   const std::string& label)
{
    cones_.push_back({ConeKind::RotatedSOC, {a, b}, std::move(tail), label});
}

void ConicProgram::validate() const
{
    const int n = n_vars();
    auto check = [n](const LinExpr& e, const std::string& where) {
        for (const auto& [i, a] : e.terms) {
            if (i < 0 || i >= n) {
                throw std::invalid_argument(where + ": variable index " + std::to_string(i) +
                                            " out of range");
            }
            if (!std::isfinite(a)) throw std::invalid_argument(where + ": non-finite coefficient");
        }
        if (!std::isfinite(e.constant)) throw std::invalid_argument(where + ": non-finite constant");
    };
    check(objective_, "objective");
    for (const auto& r : rows_) {
        check(r.expr, "row " + r.label);
        if (!std::isfinite(r.rhs)) throw std::invalid_argument("row " + r.label + ": non-finite rhs");
    }
    for (const auto& c : cones_) {
        std::size_t want = c.kind == ConeKind::SOC ? 1 : 2;
        if (c.heads.size() != want) {
            throw std::invalid_argument("cone " + c.label + ": wrong number of head entries");
        }
        for (const auto& h : c.heads) check(h, "cone " + c.label);
        for (const auto& t : c.tail) check(t, "cone " + c.label);
    }
}

double ConicProgram::cone_violation(const Cone& cone, const std::vector<double>& x)
{
    double tail2 = 0.0;
    for (const auto& t : cone.tail) {
        double v = t.eval(x);
        tail2 += v * v;
    }
    if (cone.kind == ConeKind::SOC) {
        return std::max(0.0, std::sqrt(tail2) - cone.heads[0].eval(x));
    }
    double a = cone.heads[0].eval(x);
    double b = cone.heads[1].eval(x);
    // Equivalent SOC: ||(tail, (a-b)/sqrt2)|| <= (a+b)/sqrt2.
    double d = (a - b) / std::sqrt(2.0);
    double viol = std::sqrt(tail2 + d * d) - (a + b) / std::sqrt(2.0);
    viol = std::max(viol, -a);
    viol = std::max(viol, -b);
    return std::max(0.0, viol);
}

Violation ConicProgram::violation(const std::vector<double>& x) const
{
    Violation v;
    for (const auto& r : rows_) {
        double lhs = r.expr.eval(x);
        double e = r.sense == RowSense::Equal ? std::fabs(lhs - r.rhs) : std::max(0.0, lhs - r.rhs);
        v.linear = std::max(v.linear, e);
    }
    for (const auto& c : cones_) v.cone = std::max(v.cone, cone_violation(c, x));
    return v;
}

static void dump_expr(std::ostream& os, const LinExpr& e)
{
    bool first = true;
    for (const auto& [i, a] : e.terms) {
        if (!first) os << " + ";
        os << format_double(a) << "*x" << i;
        first = false;
    }
    if (e.constant != 0.0 || first) {
        if (!first) os << " + ";
        os << format_double(e.constant);
    }
}

static void dump_list(std::ostream& os, const std::vector<LinExpr>& list)
{
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (i) os << " ; ";
        dump_expr(os, list[i]);
    }
}

std::string ConicProgram::dump() const
{
    std::ostringstream os;
    os << "program " << title_ << '\n';
    for (int i = 0; i < n_vars(); ++i) os << "var " << i << ' ' << names_[i] << '\n';
    os << "objective max ";
    dump_expr(os, objective_);
    os << '\n';
    for (const auto& r : rows_) {
        os << "row " << r.label << ' ';
        dump_expr(os, r.expr);
        os << (r.sense == RowSense::Equal ? " = " : " <= ") << format_double(r.rhs) << '\n';
    }
    for (const auto& c : cones_) {
        if (c.kind == ConeKind::SOC) {
            os << "soc " << c.label << " dim " << c.tail.size() + 1 << " head ";
            dump_expr(os, c.heads[0]);
        } else {
            os << "rsoc " << c.label << " dim " << c.tail.size() + 2 << " heads ";
            dump_list(os, c.heads);
        }
        os << " tail ";
        dump_list(os, c.tail);
        os << '\n';
    }
    return os.str();
}

}  // namespace cfmimo::conic
