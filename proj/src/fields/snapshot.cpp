#include "oldroyd/snapshot.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "oldroyd/errors.hpp"

namespace oldroyd {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& token) {
    // strtod round-trips %.17g output exactly, including exponents and inf/nan.
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
        throw InvalidArgument("snapshot: malformed number '" + token + "'");
    }
    return v;
}

}  // namespace

void write_snapshot(std::ostream& os, const Field& field, double time) {
    const Grid& grid = field.grid();
    os << grid.dim();
    for (int d = 0; d < grid.dim(); ++d) os << ' ' << grid.cells(d);
    os << ' ' << field.components() << ' ' << format_double(time) << '\n';
    for (std::size_t n = 0; n < field.nodes(); ++n) {
        for (int c = 0; c < field.components(); ++c) {
            if (c) os << ' ';
            os << format_double(field(c, n));
        }
        os << '\n';
    }
}

void write_snapshot(const std::filesystem::path& path, const Field& field, double time) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open snapshot for writing: " + path.string());
    write_snapshot(os, field, time);
}

Snapshot read_snapshot(std::istream& is) {
    Snapshot snap;
    std::string header;
    if (!std::getline(is, header)) throw InvalidArgument("snapshot: missing header");
    std::istringstream hs(header);
    std::vector<std::string> tokens;
    for (std::string tok; hs >> tok;) tokens.push_back(tok);
    if (tokens.empty()) throw InvalidArgument("snapshot: empty header");
    snap.dim = std::stoi(tokens[0]);
    if ((snap.dim != 2 && snap.dim != 3) || tokens.size() != static_cast<std::size_t>(snap.dim) + 3) {
        throw InvalidArgument("snapshot: header must be 'dim n1 .. ndim components t'");
    }
    std::size_t count = 1;
    for (int d = 0; d < snap.dim; ++d) {
        snap.cells[d] = std::stoi(tokens[1 + d]);
        count *= static_cast<std::size_t>(snap.cells[d] + 1);
    }
    snap.components = std::stoi(tokens[1 + snap.dim]);
    snap.time = parse_double(tokens[2 + snap.dim]);
    count *= static_cast<std::size_t>(snap.components);

    snap.values.reserve(count);
    for (std::string tok; snap.values.size() < count && is >> tok;) {
        snap.values.push_back(parse_double(tok));
    }
    if (snap.values.size() != count) {
        throw InvalidArgument("snapshot: expected " + std::to_string(count) + " values, got " +
                              std::to_string(snap.values.size()));
    }
    return snap;
}

Snapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open snapshot: " + path.string());
    return read_snapshot(is);
}

void load_snapshot(const Snapshot& snap, Field& field) {
    const Grid& grid = field.grid();
    bool ok = snap.dim == grid.dim() && snap.components == field.components();
    for (int d = 0; ok && d < grid.dim(); ++d) ok = snap.cells[d] == grid.cells(d);
    if (!ok) throw InvalidArgument("snapshot shape does not match the target field");
    const int nc = field.components();
    for (std::size_t n = 0; n < field.nodes(); ++n) {
        for (int c = 0; c < nc; ++c) field(c, n) = snap.values[n * static_cast<std::size_t>(nc) + c];
    }
}

}  // namespace oldroyd
