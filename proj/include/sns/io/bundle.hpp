#pragma once

// Result bundle: summary.json, CSV tables and binary snapshots.
//
// Snapshot layout, all integers and floats little-endian:
//   char[8]  magic "SNSSNAP1"
//   u32      d, K
//   u64      n, count
//   n x { i32 k[3], i32 polarization }      mode table
//   count x { u64 step, f64 t, n x { f64 re, f64 im } }
// The complex values are the Fourier amplitudes of the first n modes.

#include <bit>
#include <complex>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sns/field.hpp"

namespace sns::io {

namespace detail {

inline void put_u32(std::ostream& o, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) o.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u64(std::ostream& o, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) o.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_f64(std::ostream& o, double v) { put_u64(o, std::bit_cast<std::uint64_t>(v)); }

inline std::uint64_t get_le(std::istream& in, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) {
        const int c = in.get();
        if (c == std::char_traits<char>::eof()) throw std::runtime_error("snapshot file truncated");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return v;
}
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_le(in, 8)); }

} // namespace detail

struct SnapshotFrame {
    std::uint64_t step = 0;
    double t = 0.0;
    SpectralField u;
};

inline void write_snapshots(const std::filesystem::path& path, const ModeBasis& basis, std::size_t n,
                            const std::vector<SnapshotFrame>& frames) {
    check_level(basis, n);
    std::ofstream o(path, std::ios::binary);
    if (!o) throw std::runtime_error("cannot write " + path.string());
    o.write("SNSSNAP1", 8);
    detail::put_u32(o, static_cast<std::uint32_t>(basis.dimension()));
    detail::put_u32(o, static_cast<std::uint32_t>(basis.max_wavenumber()));
    detail::put_u64(o, n);
    detail::put_u64(o, frames.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& m = basis.mode(i);
        for (int j = 0; j < 3; ++j) detail::put_u32(o, static_cast<std::uint32_t>(m.k[j]));
        detail::put_u32(o, static_cast<std::uint32_t>(m.polarization));
    }
    for (const auto& f : frames) {
        detail::put_u64(o, f.step);
        detail::put_f64(o, f.t);
        const SpectralField u = project_Pn(f.u, n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto a = u.amplitude(i);
            detail::put_f64(o, a.real());
            detail::put_f64(o, a.imag());
        }
    }
    if (!o) throw std::runtime_error("write failed for " + path.string());
}

/// Reads a snapshot file against a basis with the same d, K and mode order.
inline std::vector<SnapshotFrame> read_snapshots(const std::filesystem::path& path, const BasisPtr& basis) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "SNSSNAP1", 8) != 0) throw std::runtime_error("not a snapshot file: " + path.string());
    const auto d = static_cast<int>(detail::get_le(in, 4));
    const auto K = static_cast<int>(detail::get_le(in, 4));
    const std::size_t n = detail::get_le(in, 8);
    const std::size_t count = detail::get_le(in, 8);
    if (d != basis->dimension() || K != basis->max_wavenumber() || n > basis->size())
        throw std::runtime_error("snapshot header does not match the basis");
    for (std::size_t i = 0; i < n; ++i) {
        const auto& m = basis->mode(i);
        for (int j = 0; j < 3; ++j)
            if (static_cast<std::int32_t>(detail::get_le(in, 4)) != m.k[j]) throw std::runtime_error("snapshot mode table mismatch");
        if (static_cast<std::int32_t>(detail::get_le(in, 4)) != m.polarization) throw std::runtime_error("snapshot mode table mismatch");
    }
    std::vector<SnapshotFrame> frames;
    frames.reserve(count);
    for (std::size_t f = 0; f < count; ++f) {
        SnapshotFrame fr;
        fr.step = detail::get_le(in, 8);
        fr.t = detail::get_f64(in);
        fr.u = SpectralField(basis);
        for (std::size_t i = 0; i < n; ++i) {
            const double re = detail::get_f64(in), im = detail::get_f64(in);
            fr.u[i] = basis->mode(i).kind == ModeKind::Cosine ? 2.0 * re : 2.0 * im;
        }
        frames.push_back(std::move(fr));
    }
    return frames;
}

/// CSV writer with shortest round-trip formatting for doubles.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        row_strings(header);
    }

    template <class... Ts>
    void row(const Ts&... v) {
        std::string line;
        bool first = true;
        ((line += (first ? "" : ",") + cell(v), first = false), ...);
        out_ << line << '\n';
    }

    static std::string cell(double v) { return nlohmann::json(v).dump(); }
    static std::string cell(float v) { return cell(static_cast<double>(v)); }
    static std::string cell(const std::string& v) {
        if (v.find_first_of(",\"\n") == std::string::npos) return v;
        std::string q = "\"";
        for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    }
    static std::string cell(const char* v) { return cell(std::string(v)); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    template <class I>
        requires std::is_integral_v<I>
    static std::string cell(I v) {
        return std::to_string(v);
    }

private:
    void row_strings(const std::vector<std::string>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << v[i];
        out_ << '\n';
    }
    std::ofstream out_;
};

inline void write_summary(const std::filesystem::path& path, const nlohmann::json& summary) {
    std::ofstream o(path);
    if (!o) throw std::runtime_error("cannot write " + path.string());
    o << summary.dump(2) << '\n';
}

} // namespace sns::io
