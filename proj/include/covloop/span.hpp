// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <tuple>

namespace covloop {

/// Half-open source region. Lines and columns are 1-based; columns count
/// UTF-8 bytes. The end coordinate is exclusive, so start == end denotes an
/// empty region.
struct SourceSpan {
    int start_line = 1;
    int start_col = 1;
    int end_line = 1;
    int end_col = 1;

    bool operator==(const SourceSpan& o) const = default;

    std::tuple<int, int> start() const { return {start_line, start_col}; }
    std::tuple<int, int> end() const { return {end_line, end_col}; }

    bool valid() const { return start() <= end(); }
    bool empty() const { return start() == end(); }

    bool contains(const SourceSpan& inner) const {
        return start() <= inner.start() && inner.end() <= end();
    }

    bool overlaps(const SourceSpan& o) const {
        if (empty() || o.empty()) return false;
        return start() < o.end() && o.start() < end();
    }

    std::string str() const {
        return std::to_string(start_line) + "." + std::to_string(start_col) + "-" +
               std::to_string(end_line) + "." + std::to_string(end_col);
    }

    static SourceSpan merge(const SourceSpan& a, const SourceSpan& b) {
        SourceSpan s;
        std::tie(s.start_line, s.start_col) = std::min(a.start(), b.start());
        std::tie(s.end_line, s.end_col) = std::max(a.end(), b.end());
        return s;
    }
};

inline bool operator<(const SourceSpan& a, const SourceSpan& b) {
    return std::make_tuple(a.start_line, a.start_col, a.end_line, a.end_col) <
           std::make_tuple(b.start_line, b.start_col, b.end_line, b.end_col);
}

} // namespace covloop
