#pragma once

// Grid file format: a short key-value manifest followed by per-field
// payloads. Text payloads carry one decimal value (or one '0'/'1') per
// line, row-major with the first coordinate fastest; binary payloads carry
// raw little-endian 64-bit floats (or packed bits, LSB first) in the same
// order and round-trip bit-exactly.
//
//   onesided-grid 1
//   dim 2
//   depth 3
//   extent <origin per axis...> <width_exp>
//   encoding text|binary
//   fields 2
//   field w weight
//   <payload>
//   field E set
//   <payload>

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"

namespace onesided {

static_assert(std::endian::native == std::endian::little,
              "binary payloads assume a little-endian host");

struct GridFileField {
    enum class Kind { Weight, Set };
    std::string name;
    Kind kind = Kind::Weight;
    std::vector<double> values;        // weight payload
    std::vector<std::uint8_t> mask;    // set payload (one byte per cell)
};

struct GridFile {
    GridDomain dom;
    bool binary = false;
    std::vector<GridFileField> fields;

    const GridFileField& find(const std::string& name) const {
        for (const auto& f : fields)
            if (f.name == name) return f;
        throw std::runtime_error("grid file: missing field '" + name + "'");
    }
};

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw std::runtime_error("grid file: bad number '" + s + "'");
    return v;
}

}  // namespace detail

inline void write_grid_file(const std::string& path, const GridFile& gf) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    const GridDomain& d = gf.dom;
    out << "onesided-grid 1\n";
    out << "dim " << d.dim << "\n";
    out << "depth " << d.depth << "\n";
    out << "extent";
    for (int a = 0; a < d.dim; ++a) out << ' ' << d.origin[a];
    out << ' ' << d.width_exp << "\n";
    out << "encoding " << (gf.binary ? "binary" : "text") << "\n";
    out << "fields " << gf.fields.size() << "\n";
    for (const auto& f : gf.fields) {
        out << "field " << f.name << ' '
            << (f.kind == GridFileField::Kind::Weight ? "weight" : "set") << "\n";
        if (f.kind == GridFileField::Kind::Weight) {
            if (f.values.size() != d.ncells) throw std::runtime_error("field size mismatch");
            if (gf.binary) {
                std::size_t nbytes = f.values.size() * sizeof(double);
                out << "bytes " << nbytes << "\n";
                out.write(reinterpret_cast<const char*>(f.values.data()),
                          static_cast<std::streamsize>(nbytes));
                out << "\n";
            } else {
                for (double v : f.values) out << detail::format_double(v) << "\n";
            }
        } else {
            if (f.mask.size() != d.ncells) throw std::runtime_error("field size mismatch");
            if (gf.binary) {
                std::vector<std::uint8_t> packed((f.mask.size() + 7) / 8, 0);
                for (std::size_t i = 0; i < f.mask.size(); ++i)
                    if (f.mask[i]) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
                out << "bytes " << packed.size() << "\n";
                out.write(reinterpret_cast<const char*>(packed.data()),
                          static_cast<std::streamsize>(packed.size()));
                out << "\n";
            } else {
                for (auto m : f.mask) out << (m ? '1' : '0') << "\n";
            }
        }
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline GridFile read_grid_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    auto next_line = [&]() -> std::string {
        if (pos >= blob.size()) throw std::runtime_error("grid file: unexpected end");
        std::size_t nl = blob.find('\n', pos);
        if (nl == std::string::npos) nl = blob.size();
        std::string line = blob.substr(pos, nl - pos);
        pos = nl + 1;
        return line;
    };
    auto expect_key = [&](const std::string& key) -> std::string {
        std::string line = next_line();
        if (line.rfind(key + " ", 0) != 0)
            throw std::runtime_error("grid file: expected '" + key + "', got '" + line + "'");
        return line.substr(key.size() + 1);
    };

    if (next_line() != "onesided-grid 1")
        throw std::runtime_error("grid file: bad magic");
    int dim = std::stoi(expect_key("dim"));
    int depth = std::stoi(expect_key("depth"));
    std::istringstream ext(expect_key("extent"));
    std::array<long long, 3> origin{};
    for (int a = 0; a < dim; ++a) ext >> origin[a];
    int width_exp = 0;
    ext >> width_exp;
    if (!ext) throw std::runtime_error("grid file: bad extent line");
    std::string enc = expect_key("encoding");
    if (enc != "text" && enc != "binary") throw std::runtime_error("grid file: bad encoding");
    std::size_t nfields = static_cast<std::size_t>(std::stoul(expect_key("fields")));

    GridFile gf;
    gf.dom = GridDomain(dim, depth, width_exp, origin);
    gf.binary = enc == "binary";

    for (std::size_t fi = 0; fi < nfields; ++fi) {
        std::istringstream fh(expect_key("field"));
        GridFileField f;
        std::string kind;
        fh >> f.name >> kind;
        if (kind == "weight") f.kind = GridFileField::Kind::Weight;
        else if (kind == "set") f.kind = GridFileField::Kind::Set;
        else throw std::runtime_error("grid file: bad field kind '" + kind + "'");

        if (gf.binary) {
            std::size_t nbytes = static_cast<std::size_t>(std::stoull(expect_key("bytes")));
            if (pos + nbytes > blob.size()) throw std::runtime_error("grid file: short payload");
            const char* raw = blob.data() + pos;
            if (f.kind == GridFileField::Kind::Weight) {
                if (nbytes != gf.dom.ncells * sizeof(double))
                    throw std::runtime_error("grid file: payload size mismatch");
                f.values.resize(gf.dom.ncells);
                std::memcpy(f.values.data(), raw, nbytes);
            } else {
                if (nbytes != (gf.dom.ncells + 7) / 8)
                    throw std::runtime_error("grid file: payload size mismatch");
                f.mask.assign(gf.dom.ncells, 0);
                for (std::size_t i = 0; i < gf.dom.ncells; ++i)
                    f.mask[i] = (static_cast<std::uint8_t>(raw[i / 8]) >> (i % 8)) & 1u;
            }
            pos += nbytes;
            if (pos < blob.size() && blob[pos] == '\n') ++pos;
        } else {
            if (f.kind == GridFileField::Kind::Weight) {
                f.values.reserve(gf.dom.ncells);
                for (std::size_t i = 0; i < gf.dom.ncells; ++i)
                    f.values.push_back(detail::parse_double(next_line()));
            } else {
                f.mask.reserve(gf.dom.ncells);
                for (std::size_t i = 0; i < gf.dom.ncells; ++i) {
                    std::string line = next_line();
                    if (line != "0" && line != "1")
                        throw std::runtime_error("grid file: bad set entry '" + line + "'");
                    f.mask.push_back(line == "1" ? 1 : 0);
                }
            }
        }
        gf.fields.push_back(std::move(f));
    }
    return gf;
}

inline GridFileField pack_field(const std::string& name, const WeightField& w) {
    GridFileField f;
    f.name = name;
    f.kind = GridFileField::Kind::Weight;
    f.values = w.density;
    return f;
}
inline GridFileField pack_field(const std::string& name, const CellSet& e) {
    GridFileField f;
    f.name = name;
    f.kind = GridFileField::Kind::Set;
    f.mask = e.mask;
    return f;
}

inline WeightField unpack_weight(const GridFile& gf, const std::string& name) {
    const auto& f = gf.find(name);
    if (f.kind != GridFileField::Kind::Weight)
        throw std::runtime_error("grid file: field '" + name + "' is not a weight");
    WeightField w(gf.dom);
    w.density = f.values;
    w.check_nonnegative();
    return w;
}
inline CellSet unpack_set(const GridFile& gf, const std::string& name) {
    const auto& f = gf.find(name);
    if (f.kind != GridFileField::Kind::Set)
        throw std::runtime_error("grid file: field '" + name + "' is not a set");
    CellSet e(gf.dom);
    e.mask = f.mask;
    return e;
}

}  // namespace onesided
