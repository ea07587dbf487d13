#pragma once

// Scrambled and shifted Sobol draws.
//
// Bit-level algorithm (reproducible by other implementations):
//  * Sobol points use 32-bit direction numbers from sobol_directions.hpp and
//    Gray-code order. Point 0 (all zeros) is skipped, so the i-th returned
//    point is Gray-code index i (1-based).
//  * Linear matrix scramble + digital shift, per dimension d = 0..D-1 in order,
//    with a std::mt19937_64 seeded by `seed`. For input bit j = 0..31 (j = 0 is
//    the most significant bit) draw w = rng() >> 32 and form the column mask
//        col[j] = (1 << (31 - j)) | (w & ((1 << (31 - j)) - 1)).
//    Then draw the shift as rng() >> 32. The scrambled integer is
//        y = shift XOR (XOR over set input bits j of col[j]),
//    and the coordinate is y / 2^32.
//  * Exact zeros are nudged to 2^-33 (and ones to 1 - 2^-33) before the inverse
//    normal CDF; the tensor records how many were nudged.

#include "mixlogit/error.hpp"
#include "mixlogit/modelspec.hpp"
#include "mixlogit/sobol_directions.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace mixlogit {

using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kSobolBits = 32;
inline constexpr double kTwoPow32 = 4294967296.0;

namespace detail {

inline std::vector<std::array<std::uint32_t, kSobolBits>> sobol_directions(int dim)
{
    if (dim < 1 || dim > kSobolMaxDim)
        throw Error(ErrorCode::DimUnsupported,
                    "dimension " + std::to_string(dim) + " outside 1.." + std::to_string(kSobolMaxDim));
    const auto& table = sobol_init_table();
    std::vector<std::array<std::uint32_t, kSobolBits>> v(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) {
        auto& vd = v[static_cast<std::size_t>(d)];
        const auto& init = table[static_cast<std::size_t>(d)];
        const int s = std::bit_width(init.poly) - 1;
        if (s == 0) {
            for (int i = 0; i < kSobolBits; ++i) vd[i] = 1u << (kSobolBits - 1 - i);
            continue;
        }
        for (int i = 0; i < s && i < kSobolBits; ++i) vd[i] = init.m[static_cast<std::size_t>(i)] << (kSobolBits - 1 - i);
        for (int i = s; i < kSobolBits; ++i) {
            std::uint32_t x = vd[i - s] ^ (vd[i - s] >> s);
            for (int k = 1; k < s; ++k)
                if ((init.poly >> (s - k)) & 1u) x ^= vd[i - k];
            vd[i] = x;
        }
    }
    return v;
}

/// First `count` Sobol points after the zero point, as 32-bit integers, row-major.
inline std::vector<std::uint32_t> sobol_integers(std::size_t count, int dim)
{
    const auto v = sobol_directions(dim);
    const auto D = static_cast<std::size_t>(dim);
    std::vector<std::uint32_t> out(count * D);
    std::vector<std::uint32_t> x(D, 0);
    for (std::size_t i = 0; i < count; ++i) {
        // Gray-code step from point i to point i + 1.
        const int c = std::countr_one(i);
        for (std::size_t d = 0; d < D; ++d) {
            x[d] ^= v[d][static_cast<std::size_t>(c)];
            out[i * D + d] = x[d];
        }
    }
    return out;
}

struct ScrambleDims {
    std::vector<std::array<std::uint32_t, kSobolBits>> columns;
    std::vector<std::uint32_t> shift;

    ScrambleDims(std::size_t dim, std::uint64_t seed) : columns(dim), shift(dim)
    {
        std::mt19937_64 rng(seed);
        for (std::size_t d = 0; d < dim; ++d) {
            for (int j = 0; j < kSobolBits; ++j) {
                const auto w = static_cast<std::uint32_t>(rng() >> 32);
                const std::uint32_t lead = 1u << (kSobolBits - 1 - j);
                columns[d][static_cast<std::size_t>(j)] = lead | (w & (lead - 1u));
            }
            shift[d] = static_cast<std::uint32_t>(rng() >> 32);
        }
    }

    [[nodiscard]] std::uint32_t apply(std::size_t d, std::uint32_t x) const
    {
        std::uint32_t y = shift[d];
        const auto& col = columns[d];
        while (x) {
            const int top = std::countl_zero(x);
            y ^= col[static_cast<std::size_t>(top)];
            x &= ~(1u << (kSobolBits - 1 - top));
        }
        return y;
    }
};

} // namespace detail

/// First `count` points of the unscrambled Sobol sequence in [0,1)^dim,
/// skipping the all-zero point.
inline PointMatrix sobol_points(std::size_t count, int dim)
{
    if (count < 1) throw Error(ErrorCode::InvalidValue, "sobol_points needs count >= 1");
    const auto ints = detail::sobol_integers(count, dim);
    PointMatrix out(static_cast<Eigen::Index>(count), dim);
    for (std::size_t i = 0; i < ints.size(); ++i) out.data()[i] = ints[i] / kTwoPow32;
    return out;
}

/// Linear matrix scramble followed by a digital shift, independently per column.
inline PointMatrix scramble_shift(const PointMatrix& points, std::uint64_t seed)
{
    const auto dims = static_cast<std::size_t>(points.cols());
    const detail::ScrambleDims scr(dims, seed);
    PointMatrix out(points.rows(), points.cols());
    for (Eigen::Index i = 0; i < points.rows(); ++i)
        for (std::size_t d = 0; d < dims; ++d) {
            const double u = points(i, static_cast<Eigen::Index>(d));
            const auto x = static_cast<std::uint32_t>(std::floor(std::clamp(u, 0.0, 1.0 - 1.0 / kTwoPow32) * kTwoPow32));
            out(i, static_cast<Eigen::Index>(d)) = scr.apply(d, x) / kTwoPow32;
        }
    return out;
}

/// Inverse standard normal CDF (Wichura's AS 241, PPND16).
inline double inverse_normal_cdf(double p)
{
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r + 6.7265770927008700853e+4) * r +
                    4.5921953931549871457e+4) * r + 1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r + 3.9307895800092710610e+4) * r +
                    2.1213794301586595867e+4) * r + 5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = q < 0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r + 2.41780725177450611770e-1) * r +
                   1.27045825245236838258e0) * r + 3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r + 1.51986665636164571966e-2) * r +
                   1.48103976427480074590e-1) * r + 6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 1.24266094738807843860e-3) * r +
                   2.65321895265761230930e-2) * r + 2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r + 1.84631831751005468180e-5) * r +
                   7.86869131145613259100e-4) * r + 1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0 ? -val : val;
}

inline constexpr double kUniformNudge = 1.0 / (2.0 * kTwoPow32);

/// Elementwise inverse normal CDF; entries outside (0,1) are nudged inside and counted.
inline PointMatrix normal_draws(const PointMatrix& u, std::size_t* nudged = nullptr)
{
    PointMatrix out(u.rows(), u.cols());
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        double p = u.data()[i];
        if (p <= 0.0) {
            p = kUniformNudge;
            ++count;
        } else if (p >= 1.0) {
            p = 1.0 - kUniformNudge;
            ++count;
        }
        out.data()[i] = inverse_normal_cdf(p);
    }
    if (nudged) *nudged = count;
    return out;
}

/// Per-respondent standard-normal draws, laid out [respondent][draw][dimension].
struct DrawTensor {
    std::size_t respondents = 0;
    std::size_t draws = 0;
    std::size_t dim = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> labels; ///< one per dimension
    std::vector<double> values;
    std::size_t nudged = 0;

    static constexpr const char* kScramble = "sobol-joe-kuo/skip-zero/lms+shift/mt19937_64/32-bit";

    [[nodiscard]] std::span<const double> respondent(std::size_t n) const
    {
        return {values.data() + n * draws * dim, draws * dim};
    }

    [[nodiscard]] double at(std::size_t n, std::size_t r, std::size_t d) const
    {
        return values[(n * draws + r) * dim + d];
    }

    [[nodiscard]] std::optional<std::size_t> label_index(std::string_view label) const
    {
        for (std::size_t d = 0; d < labels.size(); ++d)
            if (labels[d] == label) return d;
        return std::nullopt;
    }

    friend bool operator==(const DrawTensor&, const DrawTensor&) = default;
};

/// One (N*R) x D scrambled sequence, partitioned so respondent n receives rows
/// [n*R, (n+1)*R). Dimensions follow spec.draw_labels().
inline DrawTensor allocate_draws(const ModelSpec& spec, std::size_t respondents, std::size_t draws, std::uint64_t seed)
{
    if (draws < 1) throw Error(ErrorCode::InvalidValue, "allocate_draws needs R >= 1");
    DrawTensor t;
    t.respondents = respondents;
    t.draws = draws;
    t.seed = seed;
    t.labels = spec.draw_labels();
    t.dim = t.labels.size();
    if (t.dim == 0 || respondents == 0) return t;

    const std::size_t total = respondents * draws;
    const auto ints = detail::sobol_integers(total, static_cast<int>(t.dim));
    const detail::ScrambleDims scr(t.dim, seed);
    t.values.resize(total * t.dim);
    for (std::size_t i = 0; i < total; ++i)
        for (std::size_t d = 0; d < t.dim; ++d) {
            const std::uint32_t y = scr.apply(d, ints[i * t.dim + d]);
            double p = y / kTwoPow32;
            if (y == 0) {
                p = kUniformNudge;
                ++t.nudged;
            }
            t.values[i * t.dim + d] = inverse_normal_cdf(p);
        }
    return t;
}

// ---------------------------------------------------------------------------
// Binary dump
//
// Little-endian layout:
//   char[8]  magic "MXLDRAW1"
//   u64      seed
//   u64      respondents N
//   u64      draws R
//   u64      dimension D
//   D x { u32 byte length, UTF-8 label }
//   f64[N*R*D] values in [respondent][draw][dimension] order
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void put_le(std::ostream& out, T v)
{
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get_le(std::istream& in)
{
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) throw Error(ErrorCode::IoError, "truncated draw dump");
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

} // namespace detail

inline void write_draws(const DrawTensor& t, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
    out.write("MXLDRAW1", 8);
    detail::put_le<std::uint64_t>(out, t.seed);
    detail::put_le<std::uint64_t>(out, t.respondents);
    detail::put_le<std::uint64_t>(out, t.draws);
    detail::put_le<std::uint64_t>(out, t.dim);
    for (const auto& l : t.labels) {
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.size()));
        out.write(l.data(), static_cast<std::streamsize>(l.size()));
    }
    for (double v : t.values) detail::put_le<double>(out, v);
}

inline DrawTensor read_draws(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    char magic[8];
    if (!in.read(magic, 8) || std::string_view(magic, 8) != "MXLDRAW1")
        throw Error(ErrorCode::IoError, "'" + path + "' is not a draw dump");
    DrawTensor t;
    t.seed = detail::get_le<std::uint64_t>(in);
    t.respondents = detail::get_le<std::uint64_t>(in);
    t.draws = detail::get_le<std::uint64_t>(in);
    t.dim = detail::get_le<std::uint64_t>(in);
    for (std::size_t d = 0; d < t.dim; ++d) {
        const auto len = detail::get_le<std::uint32_t>(in);
        std::string l(len, '\0');
        if (!in.read(l.data(), len)) throw Error(ErrorCode::IoError, "truncated draw dump");
        t.labels.push_back(std::move(l));
    }
    t.values.resize(t.respondents * t.draws * t.dim);
    for (auto& v : t.values) v = detail::get_le<double>(in);
    return t;
}

} // namespace mixlogit
