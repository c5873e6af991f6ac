#include "sqa/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "sqa/error.hpp"

namespace sqa {

namespace {

constexpr char kMagic[4] = {'S', 'Q', 'A', 'C'};
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
    if (!in) throw IoError("checkpoint truncated: " + path);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::istream& in, const std::string& path) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw IoError("checkpoint truncated: " + path);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::vector<NamedParam>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        write_u32(out, static_cast<std::uint32_t>(t.name.size()));
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        write_u32(out, static_cast<std::uint32_t>(t.tensor.shape().size()));
        for (int d : t.tensor.shape()) write_u32(out, static_cast<std::uint32_t>(d));
        for (double v : t.tensor.data()) write_f64(out, v);
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<NamedTensorData> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw IoError("not a SQAC checkpoint: " + path);
    }
    const std::uint32_t version = read_u32(in, path);
    if (version != kVersion) {
        throw IoError("unsupported checkpoint version " + std::to_string(version) + ": " + path);
    }
    const std::uint32_t count = read_u32(in, path);
    std::vector<NamedTensorData> tensors;
    tensors.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensorData t;
        const std::uint32_t name_len = read_u32(in, path);
        t.name.resize(name_len);
        in.read(t.name.data(), name_len);
        if (!in) throw IoError("checkpoint truncated: " + path);
        const std::uint32_t rank = read_u32(in, path);
        std::int64_t numel = 1;
        for (std::uint32_t r = 0; r < rank; ++r) {
            const std::uint32_t d = read_u32(in, path);
            t.shape.push_back(static_cast<int>(d));
            numel *= d;
        }
        t.data.resize(static_cast<std::size_t>(numel));
        for (auto& v : t.data) v = read_f64(in, path);
        tensors.push_back(std::move(t));
    }
    return tensors;
}

void save_model(const std::string& path, ModelState& state) {
    save_checkpoint(path, state.named_tensors());
}

ModelState load_model(const std::string& path, const ModelConfig& config) {
    ModelState state = init_model_state(config, 0);
    std::map<std::string, NamedTensorData> by_name;
    for (auto& t : load_checkpoint(path)) by_name[t.name] = std::move(t);

    for (auto& expected : state.named_tensors()) {
        auto it = by_name.find(expected.name);
        if (it == by_name.end()) {
            throw IoError("checkpoint/config mismatch: missing tensor '" + expected.name +
                          "' in " + path);
        }
        if (it->second.shape != expected.tensor.shape()) {
            throw IoError("checkpoint/config mismatch: tensor '" + expected.name + "' has shape " +
                          shape_to_string(it->second.shape) + ", config expects " +
                          shape_to_string(expected.tensor.shape()));
        }
        expected.tensor.data() = it->second.data;
    }
    return state;
}

}  // namespace sqa
