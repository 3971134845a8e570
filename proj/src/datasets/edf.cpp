#include "sleepssl/datasets/edf.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sleepssl {

namespace {

std::string fixed_field(const std::string& s, std::size_t width) {
    std::string out = s.substr(0, width);
    out.resize(width, ' ');
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\0");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\0");
    return s.substr(a, b - a + 1);
}

struct EdfSignalHeader {
    std::string label;
    double phys_min = 0, phys_max = 0;
    int dig_min = 0, dig_max = 0;
    int samples_per_record = 0;
};

std::optional<SleepStage> parse_stage_text(const std::string& text) {
    const std::string t = trim(text);
    if (t == "Sleep stage W") return SleepStage::W;
    if (t == "Sleep stage 1" || t == "Sleep stage N1") return SleepStage::N1;
    if (t == "Sleep stage 2" || t == "Sleep stage N2") return SleepStage::N2;
    if (t == "Sleep stage 3" || t == "Sleep stage 4" ||
        t == "Sleep stage N3")
        return SleepStage::N3;
    if (t == "Sleep stage R" || t == "Sleep stage REM") return SleepStage::REM;
    return std::nullopt;  // movement / unknown / '?'
}

// Parse time-stamped annotation lists out of an annotation channel's bytes.
void parse_tals(const std::string& bytes,
                std::vector<std::pair<double, SleepStage>>& out) {
    std::size_t i = 0;
    while (i < bytes.size()) {
        const std::size_t end = bytes.find('\0', i);
        if (end == std::string::npos) break;
        const std::string tal = bytes.substr(i, end - i);
        i = end + 1;
        if (tal.empty() || tal[0] != '+') continue;
        const auto mark = tal.find('\x14');
        if (mark == std::string::npos) continue;
        std::string onset_str = tal.substr(1, mark - 1);
        const auto dur = onset_str.find('\x15');
        if (dur != std::string::npos) onset_str = onset_str.substr(0, dur);
        double onset = 0;
        try {
            onset = std::stod(onset_str);
        } catch (...) {
            continue;
        }
        std::size_t p = mark + 1;
        while (p < tal.size()) {
            const auto q = tal.find('\x14', p);
            if (q == std::string::npos) break;
            if (auto stage = parse_stage_text(tal.substr(p, q - p)))
                out.emplace_back(onset, *stage);
            p = q + 1;
        }
    }
}

}  // namespace

ContinuousRecording ingest_edf(const std::string& path,
                               const std::string& channel) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open EDF file " + path);

    auto read_str = [&is, &path](std::size_t n) {
        std::string s(n, '\0');
        is.read(s.data(), static_cast<std::streamsize>(n));
        if (!is) throw std::runtime_error("truncated EDF header in " + path);
        return s;
    };

    read_str(8);   // version
    read_str(80);  // patient
    read_str(80);  // recording
    read_str(8);   // start date
    read_str(8);   // start time
    read_str(8);   // header bytes
    read_str(44);  // reserved
    const int n_records = std::stoi(read_str(8));
    const double record_duration = std::stod(read_str(8));
    const int n_signals = std::stoi(read_str(4));
    if (n_signals <= 0 || n_records < 0)
        throw std::runtime_error("invalid EDF header in " + path);

    std::vector<EdfSignalHeader> sigs(static_cast<std::size_t>(n_signals));
    for (auto& s : sigs) s.label = trim(read_str(16));
    for (int k = 0; k < n_signals; ++k) read_str(80);  // transducer
    for (int k = 0; k < n_signals; ++k) read_str(8);   // dimension
    for (auto& s : sigs) s.phys_min = std::stod(read_str(8));
    for (auto& s : sigs) s.phys_max = std::stod(read_str(8));
    for (auto& s : sigs) s.dig_min = std::stoi(read_str(8));
    for (auto& s : sigs) s.dig_max = std::stoi(read_str(8));
    for (int k = 0; k < n_signals; ++k) read_str(80);  // prefilter
    for (auto& s : sigs) s.samples_per_record = std::stoi(read_str(8));
    for (int k = 0; k < n_signals; ++k) read_str(32);  // reserved

    int target = -1, annot = -1;
    for (int k = 0; k < n_signals; ++k) {
        if (sigs[static_cast<std::size_t>(k)].label == channel) target = k;
        if (sigs[static_cast<std::size_t>(k)].label == "EDF Annotations")
            annot = k;
    }
    if (target < 0) {
        std::ostringstream msg;
        msg << "channel '" << channel << "' not found in " << path
            << "; available:";
        for (const auto& s : sigs) msg << " '" << s.label << "'";
        throw std::runtime_error(msg.str());
    }

    const auto& ts = sigs[static_cast<std::size_t>(target)];
    const double rate = ts.samples_per_record / record_duration;
    if (std::abs(rate - std::round(rate)) > 1e-6)
        throw std::runtime_error("non-integer sample rate in " + path);

    ContinuousRecording rec;
    rec.subject_id = path;
    rec.sample_rate_hz = static_cast<int>(std::round(rate));
    rec.source = RecordSource::EDF;

    const double scale =
        (ts.phys_max - ts.phys_min) /
        static_cast<double>(ts.dig_max - ts.dig_min);
    rec.signal.reserve(static_cast<std::size_t>(n_records) *
                       ts.samples_per_record);

    std::string annot_bytes;
    for (int r = 0; r < n_records; ++r) {
        for (int k = 0; k < n_signals; ++k) {
            const auto& sh = sigs[static_cast<std::size_t>(k)];
            std::vector<std::int16_t> buf(
                static_cast<std::size_t>(sh.samples_per_record));
            is.read(reinterpret_cast<char*>(buf.data()),
                    static_cast<std::streamsize>(buf.size() * 2));
            if (!is)
                throw std::runtime_error("truncated EDF data in " + path);
            if (k == target) {
                for (std::int16_t d : buf)
                    rec.signal.push_back(static_cast<float>(
                        (d - ts.dig_min) * scale + ts.phys_min));
            } else if (k == annot) {
                annot_bytes.append(reinterpret_cast<const char*>(buf.data()),
                                   buf.size() * 2);
            }
        }
    }
    if (annot >= 0) {
        parse_tals(annot_bytes, rec.stage_annotations);
        rec.has_annotations = !rec.stage_annotations.empty();
    }
    return rec;
}

void write_edf(const std::string& path, const std::string& channel,
               const std::vector<float>& signal, int sample_rate_hz,
               const std::vector<SleepStage>* hypnogram) {
    if (sample_rate_hz <= 0)
        throw std::invalid_argument("write_edf: invalid sample rate");
    const double record_duration = 30.0;
    const int spr = sample_rate_hz * 30;
    const int n_records = static_cast<int>(signal.size()) / spr;
    if (n_records == 0)
        throw std::invalid_argument("write_edf: signal shorter than a record");
    const bool with_annot = hypnogram != nullptr;
    const int n_signals = with_annot ? 2 : 1;
    const int annot_spr = 32;  // 64 bytes per record

    float mn = signal[0], mx = signal[0];
    for (float v : signal) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    if (mx == mn) mx = mn + 1.0f;

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write EDF file " + path);

    auto put = [&os](const std::string& s, std::size_t w) {
        os << fixed_field(s, w);
    };
    auto put_num = [&put](double v, std::size_t w) {
        std::ostringstream ss;
        ss.precision(static_cast<int>(w) - 2);
        ss << v;
        put(ss.str(), w);
    };

    put("0", 8);
    put("X X X X", 80);
    put("Startdate 01-JAN-2000 X X X", 80);
    put("01.01.00", 8);
    put("00.00.00", 8);
    put_num(256 + 256 * n_signals, 8);
    put(with_annot ? "EDF+C" : "", 44);
    put_num(n_records, 8);
    put_num(record_duration, 8);
    put(std::to_string(n_signals), 4);

    put(channel, 16);
    if (with_annot) put("EDF Annotations", 16);
    for (int k = 0; k < n_signals; ++k) put("", 80);  // transducer
    put("uV", 8);
    if (with_annot) put("", 8);
    put_num(mn, 8);
    if (with_annot) put_num(-1, 8);
    put_num(mx, 8);
    if (with_annot) put_num(1, 8);
    put_num(-32768, 8);
    if (with_annot) put_num(-32768, 8);
    put_num(32767, 8);
    if (with_annot) put_num(32767, 8);
    for (int k = 0; k < n_signals; ++k) put("", 80);  // prefilter
    put_num(spr, 8);
    if (with_annot) put_num(annot_spr, 8);
    for (int k = 0; k < n_signals; ++k) put("", 32);  // reserved

    const double scale = 65535.0 / (mx - mn);
    for (int r = 0; r < n_records; ++r) {
        std::vector<std::int16_t> buf(static_cast<std::size_t>(spr));
        for (int i = 0; i < spr; ++i) {
            const double d =
                (signal[static_cast<std::size_t>(r) * spr + i] - mn) * scale -
                32768.0;
            buf[static_cast<std::size_t>(i)] = static_cast<std::int16_t>(
                std::clamp(std::lround(d), -32768l, 32767l));
        }
        os.write(reinterpret_cast<const char*>(buf.data()),
                 static_cast<std::streamsize>(buf.size() * 2));

        if (with_annot) {
            std::string tal = "+" + std::to_string(30 * r) + "\x14\x14";
            if (static_cast<std::size_t>(r) < hypnogram->size()) {
                tal += "+" + std::to_string(30 * r) + "\x15" + "30" + "\x14" +
                       "Sleep stage " +
                       [&] {
                           switch ((*hypnogram)[static_cast<std::size_t>(r)]) {
                               case SleepStage::W: return std::string("W");
                               case SleepStage::N1: return std::string("1");
                               case SleepStage::N2: return std::string("2");
                               case SleepStage::N3: return std::string("3");
                               case SleepStage::REM: return std::string("R");
                           }
                           return std::string("?");
                       }() +
                       "\x14";
            }
            tal.push_back('\0');
            tal.resize(static_cast<std::size_t>(annot_spr) * 2, '\0');
            os.write(tal.data(), static_cast<std::streamsize>(tal.size()));
        }
    }
    if (!os) throw std::runtime_error("write failure on EDF file " + path);
}

}  // namespace sleepssl
