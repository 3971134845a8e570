#include "sleepssl/datasets/cache.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace sleepssl {

namespace {

void atomic_write(const fs::path& path, const std::string& bytes) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    fs::rename(tmp, path);
}

}  // namespace

void cache_write(const std::vector<SubjectRecord>& records,
                 const std::string& dir) {
    fs::create_directories(dir);
    for (const auto& rec : records) {
        std::string bytes;
        json labels = json::array();
        int epoch_len = 0;
        for (const auto& e : rec.epochs) {
            epoch_len = static_cast<int>(e.length());
            bytes.append(reinterpret_cast<const char*>(e.samples.data()),
                         e.samples.size() * sizeof(float));
            labels.push_back(e.has_label() ? json(static_cast<int>(e.label()))
                                           : json(nullptr));
        }
        atomic_write(fs::path(dir) / (rec.subject_id + ".f32"), bytes);

        json side;
        side["subject_id"] = rec.subject_id;
        side["n_epochs"] = rec.epochs.size();
        side["epoch_length"] = epoch_len;
        side["labels"] = labels;
        side["sample_rate_hz"] = rec.sample_rate_hz;
        side["source"] = rec.source == RecordSource::SYNTH ? "synth" : "edf";
        atomic_write(fs::path(dir) / (rec.subject_id + ".json"),
                     side.dump(2) + "\n");
    }
}

static SubjectRecord read_one(const fs::path& sidecar) {
    std::ifstream is(sidecar);
    if (!is) throw std::runtime_error("cannot read " + sidecar.string());
    json side;
    try {
        is >> side;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("corrupted cache sidecar " + sidecar.string() +
                                 ": " + e.what());
    }

    SubjectRecord rec;
    rec.subject_id = side.at("subject_id").get<std::string>();
    rec.sample_rate_hz = side.at("sample_rate_hz").get<int>();
    rec.source = side.at("source").get<std::string>() == "synth"
                     ? RecordSource::SYNTH
                     : RecordSource::EDF;
    const auto n_epochs = side.at("n_epochs").get<std::size_t>();
    const auto epoch_len = side.at("epoch_length").get<std::size_t>();
    const auto& labels = side.at("labels");
    if (labels.size() != n_epochs)
        throw std::runtime_error("corrupted cache sidecar " + sidecar.string() +
                                 ": label count mismatch");

    fs::path data_path = sidecar;
    data_path.replace_extension(".f32");
    std::ifstream ds(data_path, std::ios::binary);
    if (!ds) throw std::runtime_error("cannot read " + data_path.string());
    std::vector<float> all(n_epochs * epoch_len);
    ds.read(reinterpret_cast<char*>(all.data()),
            static_cast<std::streamsize>(all.size() * sizeof(float)));
    if (static_cast<std::size_t>(ds.gcount()) != all.size() * sizeof(float))
        throw std::runtime_error("truncated cache data file " +
                                 data_path.string());

    for (std::size_t e = 0; e < n_epochs; ++e) {
        std::vector<float> samples(all.begin() + static_cast<std::ptrdiff_t>(
                                                     e * epoch_len),
                                   all.begin() + static_cast<std::ptrdiff_t>(
                                                     (e + 1) * epoch_len));
        std::optional<SleepStage> label;
        if (!labels[e].is_null())
            label = static_cast<SleepStage>(labels[e].get<int>());
        rec.epochs.emplace_back(std::move(samples), rec.sample_rate_hz, label);
    }
    return rec;
}

std::vector<SubjectRecord> cache_read(const std::string& dir) {
    std::vector<fs::path> sidecars;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".json")
            sidecars.push_back(entry.path());
    std::sort(sidecars.begin(), sidecars.end());
    std::vector<SubjectRecord> out;
    out.reserve(sidecars.size());
    for (const auto& p : sidecars) out.push_back(read_one(p));
    return out;
}

std::vector<SubjectRecord> cache_read_subjects(
    const std::string& dir, const std::vector<std::string>& ids) {
    std::vector<SubjectRecord> out;
    out.reserve(ids.size());
    for (const auto& id : ids)
        out.push_back(read_one(fs::path(dir) / (id + ".json")));
    return out;
}

}  // namespace sleepssl
