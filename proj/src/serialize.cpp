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
#include "cfmimo/serialize.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cfmimo {

std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s)
{
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error("bad number: " + s);
    }
    return v;
}

void write_matrix(std::ostream& os, const std::string& name, const Matrix& m)
{
    os << "matrix " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ' ';
            os << format_double(m(i, j));
        }
        os << '\n';
    }
}

static void expect(std::istream& is, const std::string& word)
{
    std::string tok;
    if (!(is >> tok) || tok != word) {
        throw std::runtime_error("expected '" + word + "', got '" + tok + "'");
    }
}

Matrix read_matrix(std::istream& is, const std::string& name)
{
    expect(is, "matrix");
    expect(is, name);
    Eigen::Index rows = 0, cols = 0;
    if (!(is >> rows >> cols) || rows < 0 || cols < 0) {
        throw std::runtime_error("bad dimensions for matrix " + name);
    }
    Matrix m(rows, cols);
    std::string tok;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (!(is >> tok)) throw std::runtime_error("truncated matrix " + name);
            m(i, j) = parse_double(tok);
        }
    }
    return m;
}

template <typename T>
static T read_scalar(std::istream& is, const std::string& key)
{
    expect(is, key);
    T v{};
    if (!(is >> v)) throw std::runtime_error("bad value for " + key);
    return v;
}

static double read_double_field(std::istream& is, const std::string& key)
{
    expect(is, key);
    std::string tok;
    if (!(is >> tok)) throw std::runtime_error("bad value for " + key);
    return parse_double(tok);
}

static Matrix points_matrix(const std::vector<Point2>& pts)
{
    Matrix m(pts.size(), 2);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        m(i, 0) = pts[i].x;
        m(i, 1) = pts[i].y;
    }
    return m;
}

static std::vector<Point2> matrix_points(const Matrix& m)
{
    std::vector<Point2> pts(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) pts[i] = {m(i, 0), m(i, 1)};
    return pts;
}

void write_realization(std::ostream& os, const LargeScaleRealization& r,
                       const PilotAssignment& p)
{
    os << "cfmimo-realization 1\n";
    write_matrix(os, "ap_positions", points_matrix(r.ap_positions));
    write_matrix(os, "user_positions", points_matrix(r.user_positions));
    write_matrix(os, "beta", r.beta);
    os << "pilot_index " << p.pilot_index.size();
    for (int i : p.pilot_index) os << ' ' << i;
    os << '\n';
    write_matrix(os, "cross_gain", p.cross_gain);
}

void read_realization(std::istream& is, LargeScaleRealization& r, PilotAssignment& p)
{
    if (read_scalar<int>(is, "cfmimo-realization") != 1) {
        throw std::runtime_error("unsupported realization version");
    }
    r.ap_positions = matrix_points(read_matrix(is, "ap_positions"));
    r.user_positions = matrix_points(read_matrix(is, "user_positions"));
    r.beta = read_matrix(is, "beta");
    auto n = read_scalar<std::size_t>(is, "pilot_index");
    p.pilot_index.resize(n);
    for (auto& i : p.pilot_index) {
        if (!(is >> i)) throw std::runtime_error("truncated pilot_index");
    }
    p.cross_gain = read_matrix(is, "cross_gain");
}

void write_stats(std::ostream& os, const ChannelStats& s)
{
    os << "cfmimo-stats 1\n";
    os << "N " << s.N << '\n';
    os << "tau_p " << s.tau_p << '\n';
    os << "tau_c " << s.tau_c << '\n';
    os << "rho_d " << format_double(s.rho_d) << '\n';
    os << "rho_p " << format_double(s.rho_p) << '\n';
    write_matrix(os, "beta", s.beta);
    write_matrix(os, "gamma", s.gamma);
    write_matrix(os, "cross_gain", s.cross_gain);
}

ChannelStats read_stats(std::istream& is)
{
    if (read_scalar<int>(is, "cfmimo-stats") != 1) {
        throw std::runtime_error("unsupported stats version");
    }
    ChannelStats s;
    s.N = read_scalar<int>(is, "N");
    s.tau_p = read_scalar<int>(is, "tau_p");
    s.tau_c = read_scalar<int>(is, "tau_c");
    s.rho_d = read_double_field(is, "rho_d");
    s.rho_p = read_double_field(is, "rho_p");
    s.beta = read_matrix(is, "beta");
    s.gamma = read_matrix(is, "gamma");
    s.cross_gain = read_matrix(is, "cross_gain");
    return s;
}

}  // namespace cfmimo
