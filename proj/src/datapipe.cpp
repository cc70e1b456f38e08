#include "nomadet/datapipe.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>

#include "nomadet/binio.hpp"
#include "nomadet/config.hpp"
#include "nomadet/error.hpp"
#include "nomadet/seed.hpp"

namespace nomadet {

std::vector<std::string> pipeline_stages(const Preprocess& pre) {
    std::vector<std::string> s = {"modulate", "oversample", "superpose", "channel"};
    if (pre.denoise) s.emplace_back("wavelet_denoise");
    s.emplace_back("symbol_sample");
    s.emplace_back("density");
    return s;
}

SignalFrame receive(const SignalFrame& received, const Preprocess& pre) {
    return sample_symbol_centers(pre.denoise ? denoise_frame(received, pre.wavelet) : received);
}

std::uint64_t sample_seed(std::uint64_t master_seed, int label, int index) {
    return derive_seed(master_seed, {static_cast<std::uint64_t>(label), static_cast<std::uint64_t>(index)});
}

std::uint64_t dataset_digest(const NomaScenario& scenario, const Preprocess& pre) {
    const std::string text = to_json(scenario).dump() + to_json(pre).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

NomaFrame regenerate_frame(const NomaScenario& scenario, int label, std::uint64_t seed) {
    NomaScenario sc = scenario;
    sc.far_scheme = scheme_from_index(label);
    return generate_noma_frame(sc, seed);
}

namespace {

LabeledSample sample_from_seed(const NomaScenario& scenario, int label, std::uint64_t seed, const Preprocess& pre,
                               std::uint64_t digest) {
    const auto frame = regenerate_frame(scenario, label, seed);
    LabeledSample s;
    s.diagram = density_diagram(receive(frame.received, pre), pre.grid_size);
    s.label = static_cast<std::uint8_t>(label);
    s.seed = seed;
    s.snr_db = static_cast<float>(scenario.snr_db_near);
    s.diagram.meta = {digest, s.snr_db, seed};
    return s;
}

}  // namespace

LabeledSample make_sample(const NomaScenario& scenario, int label, int index, const Preprocess& pre) {
    return sample_from_seed(scenario, label, sample_seed(scenario.seed, label, index), pre,
                            dataset_digest(scenario, pre));
}

std::vector<LabeledSample> generate_dataset(const NomaScenario& scenario, const Preprocess& pre) {
    scenario.validate();
    const auto digest = dataset_digest(scenario, pre);
    std::vector<LabeledSample> out;
    out.reserve(static_cast<std::size_t>(scenario.samples_per_class) * kNumSchemes);
    for (int label = 0; label < kNumSchemes; ++label)
        for (int i = 0; i < scenario.samples_per_class; ++i)
            out.push_back(sample_from_seed(scenario, label, sample_seed(scenario.seed, label, i), pre, digest));
    return out;
}

DatasetSplit split_labels(std::span<const std::uint8_t> labels, std::array<int, 3> ratios, std::uint64_t seed) {
    if (labels.size() < 10) throw DomainError("splitting needs at least 10 samples, got " + std::to_string(labels.size()));
    for (int r : ratios)
        if (r < 0) throw DomainError("split ratios must be nonnegative");
    const long long total_ratio = static_cast<long long>(ratios[0]) + ratios[1] + ratios[2];
    if (total_ratio <= 0) throw DomainError("split ratios must not all be zero");

    const int classes = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(classes));
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    // Shuffle within each class, then interleave classes by fractional
    // position so every prefix of the merged order is close to stratified.
    std::mt19937_64 rng(seed);
    struct Entry {
        double pos;
        int cls;
        std::size_t index;
    };
    std::vector<Entry> merged;
    merged.reserve(labels.size());
    for (int c = 0; c < classes; ++c) {
        auto& v = by_class[static_cast<std::size_t>(c)];
        std::shuffle(v.begin(), v.end(), rng);
        for (std::size_t j = 0; j < v.size(); ++j)
            merged.push_back({(static_cast<double>(j) + 0.5) / static_cast<double>(v.size()), c, v[j]});
    }
    std::sort(merged.begin(), merged.end(),
              [](const Entry& a, const Entry& b) { return a.pos != b.pos ? a.pos < b.pos : a.cls < b.cls; });

    const auto n = static_cast<long long>(labels.size());
    const auto cut = [&](long long cum) { return static_cast<std::size_t>((2 * n * cum + total_ratio) / (2 * total_ratio)); };
    const std::size_t t_end = cut(ratios[0]);
    const std::size_t v_end = cut(static_cast<long long>(ratios[0]) + ratios[1]);

    DatasetSplit s;
    for (std::size_t i = 0; i < merged.size(); ++i) {
        auto& dst = i < t_end ? s.train : (i < v_end ? s.validation : s.test);
        dst.push_back(merged[i].index);
    }
    return s;
}

DatasetSplit split_dataset(std::span<const LabeledSample> samples, std::array<int, 3> ratios, std::uint64_t seed) {
    std::vector<std::uint8_t> labels(samples.size());
    std::transform(samples.begin(), samples.end(), labels.begin(), [](const LabeledSample& s) { return s.label; });
    return split_labels(labels, ratios, seed);
}

std::vector<LabeledSample> select(std::span<const LabeledSample> samples, std::span<const std::size_t> indices) {
    std::vector<LabeledSample> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(samples[i]);
    return out;
}

Dataset make_dataset(const NomaScenario& scenario, const Preprocess& pre) {
    return {dataset_digest(scenario, pre), pre.grid_size, generate_dataset(scenario, pre)};
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open " + path.string() + " for writing");
    using namespace binio;
    os.write("NMD1", 4);
    put_u16(os, kDatasetVersion);
    put_u32(os, static_cast<std::uint32_t>(data.samples.size()));
    put_u32(os, static_cast<std::uint32_t>(data.grid_size));
    put_u64(os, data.scenario_digest);
    const std::size_t cells = static_cast<std::size_t>(data.grid_size) * data.grid_size;
    for (const auto& s : data.samples) {
        if (s.diagram.grid.size() != cells) throw ShapeError("sample grid does not match the dataset grid size");
        put_u8(os, s.label);
        put_f32(os, s.snr_db);
        put_u64(os, s.seed);
        for (float v : s.diagram.grid) put_f32(os, v);
    }
    if (!os) throw DataError("failed writing dataset " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open dataset " + path.string());
    binio::Reader r(is, "dataset " + path.string());
    r.magic("NMD1");
    const auto version = r.u16();
    if (version != kDatasetVersion)
        throw VersionMismatchError("dataset " + path.string() + ": version " + std::to_string(version) +
                                   ", expected " + std::to_string(kDatasetVersion));
    Dataset d;
    const auto count = r.u32();
    d.grid_size = static_cast<int>(r.u32());
    if (d.grid_size < 2 || d.grid_size > 4096) throw DataError("dataset " + path.string() + ": implausible grid size");
    d.scenario_digest = r.u64();
    const std::size_t cells = static_cast<std::size_t>(d.grid_size) * d.grid_size;
    d.samples.reserve(std::min<std::size_t>(count, 1 << 16));
    for (std::uint32_t i = 0; i < count; ++i) {
        LabeledSample s;
        s.label = r.u8();
        if (s.label >= kNumSchemes) throw DataError("dataset " + path.string() + ": label out of range");
        s.snr_db = r.f32();
        s.seed = r.u64();
        s.diagram.grid_size = d.grid_size;
        s.diagram.grid.resize(cells);
        for (auto& v : s.diagram.grid) v = r.f32();
        s.diagram.meta = {d.scenario_digest, s.snr_db, s.seed};
        d.samples.push_back(std::move(s));
    }
    return d;
}

std::filesystem::path manifest_path(const std::filesystem::path& dataset_path) {
    return std::filesystem::path(dataset_path.string() + ".manifest.json");
}

void write_manifest(const NomaScenario& scenario, const Preprocess& pre, const std::filesystem::path& dataset_path) {
    Json j;
    j["format"] = "NMD1";
    j["version"] = kDatasetVersion;
    j["scenario_digest"] = dataset_digest(scenario, pre);
    j["scenario"] = to_json(scenario);
    j["preprocess"] = to_json(pre);
    std::ofstream os(manifest_path(dataset_path));
    if (!os) throw DataError("cannot write manifest for " + dataset_path.string());
    os << j.dump(2) << '\n';
}

}  // namespace nomadet
