#include "sqa/features.hpp"

#include <cstring>
#include <fstream>

#include "sqa/error.hpp"

namespace sqa {

namespace {

constexpr char kMagic[4] = {'S', 'Q', 'A', 'F'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw IoError("feature file truncated: " + path);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

Tensor FeatureMatrix::to_tensor() const {
    std::vector<double> data(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) data[i] = static_cast<double>(values[i]);
    return Tensor::from_data({static_cast<int>(n_frames), static_cast<int>(dim)}, std::move(data));
}

FeatureMatrix FeatureMatrix::from_tensor(const Tensor& t) {
    if (t.rank() != 2) {
        throw DimensionError("FeatureMatrix: expected rank-2 tensor, got " +
                             shape_to_string(t.shape()));
    }
    FeatureMatrix m;
    m.n_frames = static_cast<std::uint32_t>(t.dim(0));
    m.dim = static_cast<std::uint32_t>(t.dim(1));
    m.values.resize(t.data().size());
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        m.values[i] = static_cast<float>(t.data()[i]);
    }
    return m;
}

void write_features(const std::string& path, const FeatureMatrix& m) {
    if (m.values.size() != static_cast<std::size_t>(m.n_frames) * m.dim) {
        throw DimensionError("write_features: payload size does not match n_frames*dim");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write feature file: " + path);
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    write_u32(out, m.n_frames);
    write_u32(out, m.dim);
    for (float v : m.values) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        write_u32(out, bits);
    }
    if (!out) throw IoError("write failed: " + path);
}

FeatureMatrix read_features(const std::string& path, std::uint32_t max_frames) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open feature file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw IoError("not a SQAF feature file: " + path);
    }
    const std::uint32_t version = read_u32(in, path);
    if (version != kVersion) {
        throw IoError("unsupported feature file version " + std::to_string(version) + ": " + path);
    }
    FeatureMatrix m;
    m.n_frames = read_u32(in, path);
    m.dim = read_u32(in, path);
    if (max_frames > 0 && m.n_frames > max_frames) {
        throw LengthError("feature file " + path + " has " + std::to_string(m.n_frames) +
                          " frames, cap is " + std::to_string(max_frames));
    }
    const std::size_t numel = static_cast<std::size_t>(m.n_frames) * m.dim;
    m.values.resize(numel);
    for (std::size_t i = 0; i < numel; ++i) {
        const std::uint32_t bits = read_u32(in, path);
        std::memcpy(&m.values[i], &bits, 4);
    }
    // Exactly 4*n_frames*dim payload bytes: anything further is corruption.
    char extra;
    if (in.read(&extra, 1)) {
        throw IoError("feature file has trailing bytes: " + path);
    }
    return m;
}

}  // namespace sqa
