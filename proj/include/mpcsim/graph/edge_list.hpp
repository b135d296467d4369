#pragma once

#include <charconv>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mpcsim/graph/graph.hpp"

namespace mpcsim {

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::optional<std::uint64_t> parse_uint(std::string_view s) {
    std::uint64_t x = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
    return x;
}

}  // namespace detail

// Format: one "u v" per line, '#' comments, optional first line "n <count>".
inline Graph load_edge_list(std::istream& in) {
    std::vector<Edge> edges;
    std::set<Edge> seen;
    std::optional<std::size_t> header_n;
    std::size_t max_id_plus_one = 0;
    std::size_t lineno = 0;
    bool first_content = true;
    std::string raw;
    while (std::getline(in, raw)) {
        ++lineno;
        auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto tok = detail::split_ws(line);
        if (first_content && tok.size() == 2 && tok[0] == "n") {
            auto c = detail::parse_uint(tok[1]);
            if (!c) throw ParseError(lineno, "malformed header");
            header_n = *c;
            first_content = false;
            continue;
        }
        first_content = false;
        if (tok.size() != 2) throw ParseError(lineno, "malformed line");
        auto a = detail::parse_uint(tok[0]);
        auto b = detail::parse_uint(tok[1]);
        if (!a || !b || *a > kNoVertex - 1 || *b > kNoVertex - 1) throw ParseError(lineno, "malformed line");
        if (*a == *b) throw ParseError(lineno, "self-loop");
        Edge e(static_cast<Vertex>(*a), static_cast<Vertex>(*b));
        if (!seen.insert(e).second) throw ParseError(lineno, "duplicate edge");
        edges.push_back(e);
        max_id_plus_one = std::max<std::size_t>(max_id_plus_one, e.v + 1);
    }
    std::size_t n = max_id_plus_one;
    if (header_n) {
        if (*header_n < max_id_plus_one) throw ParseError(lineno, "header count below largest vertex ID");
        n = *header_n;
    }
    return Graph(n, std::move(edges));
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
    out << "n " << g.n() << '\n';
    for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
}

}  // namespace mpcsim
