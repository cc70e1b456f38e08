#include "nomadet/nn/checkpoint.hpp"

#include <fstream>

#include "nomadet/binio.hpp"

namespace nomadet::nn {

void save_checkpoint(Model& model, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open " + path.string() + " for writing");
    using namespace binio;
    const auto& c = model.config();
    os.write("NMDL", 4);
    put_u16(os, kCheckpointVersion);
    put_u32(os, static_cast<std::uint32_t>(c.input_size));
    put_u32(os, static_cast<std::uint32_t>(c.in_channels));
    put_u32(os, static_cast<std::uint32_t>(c.stem_kernel));
    put_u32(os, static_cast<std::uint32_t>(c.stem_channels));
    put_u32(os, static_cast<std::uint32_t>(c.stem_stride));
    put_u8(os, c.stem_pool ? 1 : 0);
    put_u32(os, static_cast<std::uint32_t>(c.blocks.size()));
    for (const auto& b : c.blocks) {
        put_u8(os, static_cast<std::uint8_t>(b.kind));
        put_u32(os, static_cast<std::uint32_t>(b.channels));
    }
    put_u32(os, static_cast<std::uint32_t>(c.classes));
    put_f32(os, c.bn_eps);
    put_f32(os, c.bn_momentum);

    const auto tensors = model.state_tensors();
    put_u32(os, static_cast<std::uint32_t>(tensors.size()));
    for (const auto* t : tensors) {
        put_u32(os, static_cast<std::uint32_t>(t->rank()));
        for (int d : t->shape()) put_u32(os, static_cast<std::uint32_t>(d));
        for (float v : t->values()) put_f32(os, v);
    }
    if (!os) throw DataError("failed writing checkpoint " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint " + path.string());
    binio::Reader r(is, "checkpoint " + path.string());
    r.magic("NMDL");
    const auto version = r.u16();
    if (version != kCheckpointVersion)
        throw VersionMismatchError("checkpoint " + path.string() + ": version " + std::to_string(version) +
                                   ", expected " + std::to_string(kCheckpointVersion));
    ArchConfig c;
    c.input_size = static_cast<int>(r.u32());
    c.in_channels = static_cast<int>(r.u32());
    c.stem_kernel = static_cast<int>(r.u32());
    c.stem_channels = static_cast<int>(r.u32());
    c.stem_stride = static_cast<int>(r.u32());
    c.stem_pool = r.u8() != 0;
    const auto nblocks = r.u32();
    if (nblocks > 1024) throw DataError("checkpoint " + path.string() + ": implausible block count");
    c.blocks.clear();
    for (std::uint32_t i = 0; i < nblocks; ++i) {
        const auto kind = r.u8();
        if (kind > 1) throw DataError("checkpoint " + path.string() + ": unknown block kind");
        c.blocks.push_back({static_cast<BlockKind>(kind), static_cast<int>(r.u32())});
    }
    c.classes = static_cast<int>(r.u32());
    c.bn_eps = r.f32();
    c.bn_momentum = r.f32();

    Model model(c);
    auto tensors = model.state_tensors();
    const auto count = r.u32();
    if (count != tensors.size())
        throw DataError("checkpoint " + path.string() + ": " + std::to_string(count) + " tensors, architecture needs " +
                        std::to_string(tensors.size()));
    for (auto* t : tensors) {
        const auto rank = r.u32();
        if (rank != static_cast<std::uint32_t>(t->rank())) throw DataError("checkpoint tensor rank mismatch");
        for (int d : t->shape())
            if (r.u32() != static_cast<std::uint32_t>(d)) throw DataError("checkpoint tensor shape mismatch");
        for (auto& v : t->values()) v = r.f32();
    }
    return model;
}

}  // namespace nomadet::nn
