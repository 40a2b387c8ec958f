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
 * @file serialize.hpp
 * @brief Plain-text round-trip serialization of realizations and statistics.
 *
 * Format: a magic line, then `key value` scalars and matrix blocks
 * `matrix <name> <rows> <cols>` followed by one row per line. Doubles are
 * written in shortest round-trip form, so reading back is bit-exact.
 */
#ifndef CFMIMO_SERIALIZE_HPP
#define CFMIMO_SERIALIZE_HPP

#include "cfmimo/netmodel.hpp"

#include <iosfwd>
#include <string>

namespace cfmimo {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

void write_matrix(std::ostream& os, const std::string& name, const Matrix& m);
Matrix read_matrix(std::istream& is, const std::string& name);

void write_realization(std::ostream& os, const LargeScaleRealization& r,
                       const PilotAssignment& p);
void read_realization(std::istream& is, LargeScaleRealization& r, PilotAssignment& p);

void write_stats(std::ostream& os, const ChannelStats& s);
ChannelStats read_stats(std::istream& is);

}  // namespace cfmimo

#endif
