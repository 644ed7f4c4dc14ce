#include "skewdiff/path_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "skewdiff/error.hpp"

namespace skewdiff {

namespace {

constexpr std::array<char, 4> kMagic{'S', 'K', 'W', 'D'};

template <class U>
void put_le(std::ostream& out, U value) {
    std::array<char, sizeof(U)> bytes{};
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
    out.write(bytes.data(), bytes.size());
}

template <class U>
U get_le(std::istream& in) {
    std::array<unsigned char, sizeof(U)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    require(static_cast<bool>(in), Errc::io, "truncated path dump");
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
    return value;
}

}  // namespace

void write_path_dump(const Path& path, std::ostream& out) {
    require(path.values.size() == path.grid.n_steps + 1, Errc::precondition, "path length does not match its grid");
    require(path.grid.n_steps <= 0xFFFFFFFFu, Errc::precondition, "path too long for the dump format");
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kPathDumpVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(path.grid.n_steps));
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(path.frame));
    for (double v : path.values) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    require(static_cast<bool>(out), Errc::io, "failed to write path dump");
}

void write_path_dump(const Path& path, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    require(static_cast<bool>(out), Errc::io, "cannot write " + file.string());
    write_path_dump(path, out);
}

Path read_path_dump(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    require(static_cast<bool>(in) && magic == kMagic, Errc::io, "not a SKWD path dump");
    const auto version = get_le<std::uint32_t>(in);
    require(version == kPathDumpVersion, Errc::io, "unsupported path dump version " + std::to_string(version));
    const auto n = get_le<std::uint32_t>(in);
    const auto frame = get_le<std::uint8_t>(in);
    require(frame <= static_cast<std::uint8_t>(Frame::CIR_exact), Errc::io, "unknown frame tag in path dump");
    Path path;
    path.grid = GridSpec{1.0, n};
    path.frame = static_cast<Frame>(frame);
    path.values.resize(static_cast<std::size_t>(n) + 1);
    for (double& v : path.values) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
    return path;
}

Path read_path_dump(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    require(static_cast<bool>(in), Errc::io, "cannot open " + file.string());
    return read_path_dump(in);
}

}  // namespace skewdiff
