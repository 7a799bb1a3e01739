#pragma once

#include <charconv>
#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dqnpm/error.hpp"
#include "dqnpm/qnet.hpp"
#include "dqnpm/text.hpp"

namespace dqnpm {

// Checkpoint layout (text, version 1):
//
//   dqnpm-checkpoint 1
//   shape <assets> <window> <hidden> <actions>
//   array <name> <rank> <dim_0> ... <dim_rank-1>
//   <value> <value> ...            one line, C-order, hexadecimal floats
//   ... one array/values pair per parameter array, in NetworkParams order
//   end
//
// Hex floats make save/load bit-exact.

inline constexpr std::string_view checkpoint_magic = "dqnpm-checkpoint";
inline constexpr int checkpoint_version = 1;

inline std::string serialize_checkpoint(const NetworkParams& p) {
    std::string out;
    out += std::string(checkpoint_magic) + " " + std::to_string(checkpoint_version) + "\n";
    out += "shape " + std::to_string(p.shape.assets) + " " + std::to_string(p.shape.window) + " " +
           std::to_string(p.shape.hidden) + " " + std::to_string(p.shape.actions) + "\n";
    char buf[64];
    p.for_each_array([&](const auto& arr) {
        out += "array " + std::string(arr.name) + " " + std::to_string(arr.dims.size());
        for (auto d : arr.dims) out += " " + std::to_string(d);
        out += "\n";
        bool first = true;
        for (double x : *arr.storage) {
            if (!first) out += ' ';
            first = false;
            auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::hex);
            out.append(buf, res.ptr);
        }
        out += "\n";
    });
    out += "end\n";
    return out;
}

inline NetworkParams parse_checkpoint(std::string_view contents, const std::string& source = "<checkpoint>") {
    std::istringstream in{std::string(contents)};
    auto fail = [&](const std::string& why) -> Error {
        return Error(ErrorKind::format, source + ": " + why);
    };
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != checkpoint_magic) throw fail("not a checkpoint");
    if (version != checkpoint_version) throw fail("unsupported version " + std::to_string(version));
    std::string tag;
    NetworkShape shape;
    if (!(in >> tag >> shape.assets >> shape.window >> shape.hidden >> shape.actions) || tag != "shape")
        throw fail("missing shape line");
    NetworkParams p = NetworkParams::zeros(shape);
    p.for_each_array([&](auto arr) {
        std::string name;
        std::size_t rank = 0;
        if (!(in >> tag >> name >> rank) || tag != "array") throw fail("expected array header");
        if (name != arr.name) throw fail("expected array " + std::string(arr.name) + ", found " + name);
        std::vector<std::size_t> dims(rank);
        for (auto& d : dims)
            if (!(in >> d)) throw fail("bad dims for " + name);
        if (dims != arr.dims) throw fail("dims of " + name + " do not match shape line");
        std::string token;
        for (auto& x : *arr.storage) {
            if (!(in >> token)) throw fail("truncated values in " + name);
            const char* last = token.data() + token.size();
            auto res = std::from_chars(token.data(), last, x, std::chars_format::hex);
            if (res.ec != std::errc() || res.ptr != last) throw fail("bad value '" + token + "' in " + name);
        }
    });
    if (!(in >> tag) || tag != "end") throw fail("missing end marker");
    return p;
}

inline void save_checkpoint(const std::filesystem::path& path, const NetworkParams& p) {
    text::write_file_atomic(path, serialize_checkpoint(p));
}

inline NetworkParams load_checkpoint(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::io, "no such file: " + path.string());
    return parse_checkpoint(text::read_file(path), path.string());
}

} // namespace dqnpm
