#include "sqa/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "sqa/error.hpp"

namespace fs = std::filesystem;

namespace sqa {

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = kFnvOffset;
    for (std::size_t i = 0; i < len; ++i) h = fnv1a64_step(h, p[i]);
    return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("hash_file: cannot open " + path);
    std::uint64_t h = kFnvOffset;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h = fnv1a64_step(h, static_cast<unsigned char>(buf[i]));
        }
    }
    return h;
}

std::string to_hex64(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

std::vector<std::string> write_manifest(const std::string& dir) {
    if (!fs::is_directory(dir)) throw IoError("write_manifest: not a directory: " + dir);
    std::vector<std::string> paths;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string rel = fs::relative(entry.path(), dir).generic_string();
        if (rel == "manifest.txt") continue;
        paths.push_back(std::move(rel));
    }
    std::sort(paths.begin(), paths.end());

    std::ofstream out(fs::path(dir) / "manifest.txt", std::ios::binary);
    if (!out) throw IoError("write_manifest: cannot write manifest in " + dir);
    out << "# sqa-forge manifest v1 (fnv1a64)\n";
    for (const auto& rel : paths) {
        out << to_hex64(hash_file((fs::path(dir) / rel).string())) << "  " << rel << "\n";
    }
    return paths;
}

}  // namespace sqa
