#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "generators.hpp"

namespace wsurf::io {

using nlohmann::json;

namespace detail {

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IOError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IOError("write to '" + path + "' failed");
}

inline json parse_header(const std::string& line, const std::string& what) {
    try {
        json h = json::parse(line);
        if (!h.is_object()) throw ParseError(what + " header is not a JSON object");
        return h;
    } catch (const json::exception& e) {
        throw ParseError(what + " header: " + e.what());
    }
}

inline double number(const json& h, const char* key, const std::string& what) {
    if (!h.contains(key) || !h[key].is_number()) throw ParseError(what + " header lacks numeric '" + key + "'");
    return h[key].get<double>();
}

inline int count(const json& h, const char* key, const std::string& what) {
    if (!h.contains(key) || !h[key].is_number_integer()) throw ParseError(what + " header lacks integer '" + key + "'");
    return h[key].get<int>();
}

/// Splits "a,b,c" into doubles; the expected number of columns must match.
inline std::vector<double> columns(const std::string& line, std::size_t n, int lineno) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        const std::size_t end = std::min(line.find(',', pos), line.size());
        const std::string tok = line.substr(pos, end - pos);
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw ParseError("line " + std::to_string(lineno) + ": bad number '" + tok + "'");
        }
        while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
        if (used != tok.size()) throw ParseError("line " + std::to_string(lineno) + ": bad number '" + tok + "'");
        out.push_back(v);
        pos = end + 1;
    }
    if (out.size() != n)
        throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(n) + " columns, got " +
                         std::to_string(out.size()));
    return out;
}

template <class Fill>
void read_body(std::istream& in, int n0, int n1, std::size_t ncol, Fill&& fill) {
    std::vector<char> seen(std::size_t(n0) * n1, 0);
    std::string line;
    int lineno = 1;
    long filled = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c = columns(line, ncol, lineno);
        const int i = int(c[0]), j = int(c[1]);
        if (double(i) != c[0] || double(j) != c[1] || i < 0 || j < 0 || i >= n0 || j >= n1)
            throw ParseError("line " + std::to_string(lineno) + ": node index out of range");
        if (seen[std::size_t(i) * n1 + j]) throw ParseError("line " + std::to_string(lineno) + ": duplicate node");
        seen[std::size_t(i) * n1 + j] = 1;
        fill(i, j, c);
        ++filled;
    }
    if (filled != long(n0) * n1)
        throw ParseError("expected " + std::to_string(long(n0) * n1) + " nodes, got " + std::to_string(filled));
}

} // namespace detail

/// Surface grid text format: a JSON header line
/// {"nu":..,"nv":..,"u0":..,"v0":..,"du":..,"dv":..} then "i,j,x,y,z" lines.
inline std::string format_surface(const SurfaceGrid& g) {
    const GridSpec& s = g.spec();
    json h = {{"nu", s.n0}, {"nv", s.n1}, {"u0", s.x0}, {"v0", s.y0}, {"du", s.h0}, {"dv", s.h1}};
    std::string out = h.dump() + "\n";
    for (int i = 0; i < s.n0; ++i)
        for (int j = 0; j < s.n1; ++j) {
            const Vec3& p = g(i, j);
            out += std::to_string(i) + "," + std::to_string(j) + "," + detail::fmt17(p.x()) + "," + detail::fmt17(p.y()) +
                   "," + detail::fmt17(p.z()) + "\n";
        }
    return out;
}

inline SurfaceGrid parse_surface(const std::string& text) {
    std::istringstream in(text);
    std::string first;
    if (!std::getline(in, first)) throw ParseError("surface file is empty");
    const json h = detail::parse_header(first, "surface");
    GridSpec s{detail::count(h, "nu", "surface"), detail::count(h, "nv", "surface"), detail::number(h, "u0", "surface"),
               detail::number(h, "v0", "surface"), detail::number(h, "du", "surface"), detail::number(h, "dv", "surface")};
    try {
        s.validate();
    } catch (const DomainError& e) {
        throw ParseError(std::string("surface header: ") + e.what());
    }
    Array2D<Vec3> pts(s.n0, s.n1);
    detail::read_body(in, s.n0, s.n1, 5, [&](int i, int j, const std::vector<double>& c) { pts(i, j) = Vec3(c[2], c[3], c[4]); });
    return SurfaceGrid(s, std::move(pts));
}

inline SurfaceGrid read_surface(const std::string& path) { return parse_surface(detail::read_file(path)); }
inline void write_surface(const std::string& path, const SurfaceGrid& g) { detail::write_file(path, format_surface(g)); }

/// Scalar field text format: header {"nx","ny","x0","y0","dx","dy"} then
/// "i,j,value" lines.
inline std::string format_field(const ScalarField2D& f) {
    const GridSpec& s = f.grid;
    json h = {{"nx", s.n0}, {"ny", s.n1}, {"x0", s.x0}, {"y0", s.y0}, {"dx", s.h0}, {"dy", s.h1}};
    std::string out = h.dump() + "\n";
    for (int i = 0; i < s.n0; ++i)
        for (int j = 0; j < s.n1; ++j)
            out += std::to_string(i) + "," + std::to_string(j) + "," + detail::fmt17(f(i, j)) + "\n";
    return out;
}

inline ScalarField2D parse_field(const std::string& text) {
    std::istringstream in(text);
    std::string first;
    if (!std::getline(in, first)) throw ParseError("field file is empty");
    const json h = detail::parse_header(first, "field");
    GridSpec s{detail::count(h, "nx", "field"), detail::count(h, "ny", "field"), detail::number(h, "x0", "field"),
               detail::number(h, "y0", "field"), detail::number(h, "dx", "field"), detail::number(h, "dy", "field")};
    try {
        s.validate();
    } catch (const DomainError& e) {
        throw ParseError(std::string("field header: ") + e.what());
    }
    ScalarField2D f(s);
    detail::read_body(in, s.n0, s.n1, 3, [&](int i, int j, const std::vector<double>& c) { f(i, j) = c[2]; });
    return f;
}

inline ScalarField2D read_field(const std::string& path) { return parse_field(detail::read_file(path)); }
inline void write_field(const std::string& path, const ScalarField2D& f) { detail::write_file(path, format_field(f)); }

/// Wavefront OBJ with one vertex per node and quad faces.
inline std::string format_obj(const SurfaceGrid& g) {
    const GridSpec& s = g.spec();
    std::string out = "# wsurf grid " + std::to_string(s.n0) + "x" + std::to_string(s.n1) + "\n";
    for (int i = 0; i < s.n0; ++i)
        for (int j = 0; j < s.n1; ++j) {
            const Vec3& p = g(i, j);
            out += "v " + detail::fmt17(p.x()) + " " + detail::fmt17(p.y()) + " " + detail::fmt17(p.z()) + "\n";
        }
    auto id = [&](int i, int j) { return std::to_string(i * s.n1 + j + 1); };
    for (int i = 0; i + 1 < s.n0; ++i)
        for (int j = 0; j + 1 < s.n1; ++j)
            out += "f " + id(i, j) + " " + id(i + 1, j) + " " + id(i + 1, j + 1) + " " + id(i, j + 1) + "\n";
    return out;
}

inline void write_obj(const std::string& path, const SurfaceGrid& g) { detail::write_file(path, format_obj(g)); }

/// Pair specification:
///  {"kind":"minimal"|"cmc","domain":[lo,hi]}
///  {"kind":"linear","A":..,"B":..,"domain":[..]}
///  {"kind":"fractional","A":..,"B":..,"C":..,"D":..,"domain":[..]}
///  {"kind":"table","nu":[..],"f":[..],"g":[..]}
/// "linear-fractional" and "custom-table" are accepted as kind aliases.
inline WeingartenPair pair_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) throw ParseError("pair spec needs a string 'kind'");
    const std::string kind = j["kind"];
    auto num = [&](const char* k) { return detail::number(j, k, "pair"); };
    auto vec = [&](const char* k) {
        if (!j.contains(k) || !j[k].is_array()) throw ParseError(std::string("pair spec lacks array '") + k + "'");
        std::vector<double> out;
        for (const auto& x : j[k]) {
            if (!x.is_number()) throw ParseError(std::string("pair spec '") + k + "' holds a non-number");
            out.push_back(x.get<double>());
        }
        return out;
    };
    if (kind == "table" || kind == "custom-table") return table_pair(vec("nu"), vec("f"), vec("g"));
    const auto d = vec("domain");
    if (d.size() != 2 || !(d[0] < d[1])) throw ParseError("pair domain must be [lo, hi] with lo < hi");
    const Interval I{d[0], d[1]};
    if (kind == "minimal") return minimal_pair(I);
    if (kind == "cmc") return cmc_pair(I);
    if (kind == "linear") return linear_pair(num("A"), num("B"), I);
    if (kind == "fractional" || kind == "linear-fractional") return linear_fractional_pair(num("A"), num("B"), num("C"), num("D"), I);
    throw ParseError("unknown pair kind '" + kind + "'");
}

} // namespace wsurf::io
