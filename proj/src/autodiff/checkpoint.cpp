#include "mt3/autodiff/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mt3::ad {

namespace {

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
    return v;
}

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
    for (double d : v) {
        std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(d));
        out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
    }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const ParameterStore& params, const Metadata& meta) {
    std::filesystem::create_directories(dir);
    std::ofstream man(dir / "manifest.txt");
    std::ofstream bin(dir / "params.bin", std::ios::binary);
    if (!man || !bin) throw CheckpointError("cannot write checkpoint in " + dir.string());
    man << "mt3-checkpoint 1\ndtype float64-le\n";
    for (const auto& [k, v] : meta) {
        if (k.find_first_of(" \t\n") != std::string::npos || v.find('\n') != std::string::npos)
            throw CheckpointError("metadata key/value not representable: " + k);
        man << "meta " << k << ' ' << v << '\n';
    }
    std::size_t offset = 0;
    for (const auto& p : params) {
        man << "param " << p.name << ' ' << offset << ' ' << p.shape.size();
        for (auto d : p.shape) man << ' ' << d;
        man << '\n';
        write_doubles(bin, p.value);
        offset += p.value.size();
    }
    if (!man || !bin) throw CheckpointError("write failed for checkpoint in " + dir.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
    std::ifstream man(dir / "manifest.txt");
    std::ifstream bin(dir / "params.bin", std::ios::binary);
    if (!man || !bin) throw CheckpointError("no checkpoint in " + dir.string());
    std::vector<char> raw((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
    const std::size_t n_doubles = raw.size() / 8;
    if (raw.size() % 8 != 0) throw CheckpointError("params.bin size is not a multiple of 8");

    Checkpoint ck;
    std::string line;
    std::getline(man, line);
    if (line != "mt3-checkpoint 1") throw CheckpointError("unrecognised manifest header: " + line);
    while (std::getline(man, line)) {
        if (line.empty()) continue;
        std::istringstream in(line);
        std::string kind;
        in >> kind;
        if (kind == "dtype") {
            std::string t;
            in >> t;
            if (t != "float64-le") throw CheckpointError("unsupported dtype " + t);
        } else if (kind == "meta") {
            std::string key;
            in >> key;
            std::string value;
            std::getline(in >> std::ws, value);
            ck.meta[key] = value;
        } else if (kind == "param") {
            std::string name;
            std::size_t offset = 0, rank = 0;
            in >> name >> offset >> rank;
            Shape shape(rank);
            for (auto& d : shape) in >> d;
            if (!in) throw CheckpointError("malformed param line: " + line);
            const std::size_t count = shape_size(shape);
            if (offset + count > n_doubles) throw CheckpointError("param " + name + " runs past params.bin");
            std::vector<double> v(count);
            for (std::size_t i = 0; i < count; ++i) {
                std::uint64_t bits;
                std::memcpy(&bits, raw.data() + 8 * (offset + i), 8);
                v[i] = std::bit_cast<double>(to_le(bits));
            }
            ck.params.add(name, std::move(shape), std::move(v));
        } else {
            throw CheckpointError("unknown manifest record: " + kind);
        }
    }
    return ck;
}

}  // namespace mt3::ad
