#include "spgi/demux.hpp"

#include <stdexcept>
#include <string>

#include "spgi/io.hpp"

namespace spgi {

std::vector<FrameMeasurements> demultiplex(const std::vector<AcquisitionRecord>& records) {
    if (records.empty()) throw std::invalid_argument("demultiplex: no records");
    const auto& first = records.front();
    if (first.sync_indices.empty() || first.sync_indices.front() != 0) {
        throw std::invalid_argument("demultiplex: record 0 has no sync at sample 0");
    }
    const std::size_t cycles = first.sync_indices.size();
    const std::size_t spc = first.samples.size() / cycles;
    if (spc * cycles != first.samples.size()) {
        throw std::invalid_argument("demultiplex: sample count not divisible into cycles");
    }
    const int n = static_cast<int>(records.size());
    for (int r = 0; r < n; ++r) {
        const auto& rec = records[r];
        if (rec.realization_index != r) {
            throw std::invalid_argument("demultiplex: missing or misordered realization " +
                                        std::to_string(r) + ", found index " +
                                        std::to_string(rec.realization_index));
        }
        if (rec.samples.size() != first.samples.size() ||
            rec.sync_indices.size() != cycles) {
            throw std::invalid_argument("demultiplex: record " + std::to_string(r) +
                                        " shape differs from record 0");
        }
        for (std::size_t c = 0; c < cycles; ++c) {
            if (rec.sync_indices[c] != c * spc) {
                throw std::invalid_argument("demultiplex: record " + std::to_string(r) +
                                            " sync markers are not cycle aligned");
            }
        }
    }

    std::vector<FrameMeasurements> frames(spc);
    for (std::size_t f = 0; f < spc; ++f) {
        frames[f].frame_index = static_cast<int>(f);
        frames[f].values.resize(n);
        for (int r = 0; r < n; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < cycles; ++c) {
                acc += records[r].samples[c * spc + f];
            }
            frames[f].values[r] = acc;
        }
    }
    return frames;
}

double frame_time(int frame_index, double sample_rate_hz, int samples_per_cycle) {
    if (sample_rate_hz <= 0.0) throw std::invalid_argument("frame_time: bad sample rate");
    if (frame_index < 0 || frame_index >= samples_per_cycle) {
        throw std::out_of_range("frame_time: frame " + std::to_string(frame_index) +
                                " out of range [0, " + std::to_string(samples_per_cycle) + ")");
    }
    return frame_index / sample_rate_hz;
}

void export_frame_csv(const FrameMeasurements& frame, const std::filesystem::path& path) {
    std::string text = "realization,counts\n";
    for (std::size_t r = 0; r < frame.values.size(); ++r) {
        text += std::to_string(r);
        text += ',';
        text += format_double(frame.values[r]);
        text += '\n';
    }
    std::vector<unsigned char> bytes(text.begin(), text.end());
    write_file_bytes(path, bytes);
}

void save_gfms_with_frames(const MeasurementSet& set,
                           const std::vector<FrameMeasurements>& frames,
                           const std::filesystem::path& path) {
    save_gfms(set, path);
    auto bytes = read_file_bytes(path);
    const std::uint32_t f = static_cast<std::uint32_t>(frames.size());
    bytes.insert(bytes.end(), {'F', 'R', 'M', 'T'});
    bin::put_u32(bytes, f);
    const std::size_t table_pos = bytes.size();
    for (std::uint32_t i = 0; i < f; ++i) bin::put_u64(bytes, 0);  // patched below
    std::vector<std::uint64_t> offsets(f);
    for (std::uint32_t i = 0; i < f; ++i) {
        offsets[i] = bytes.size();
        for (double v : frames[i].values) bin::put_f64(bytes, v);
    }
    for (std::uint32_t i = 0; i < f; ++i) {
        for (int b = 0; b < 8; ++b) {
            bytes[table_pos + static_cast<std::size_t>(i) * 8 + b] =
                static_cast<unsigned char>((offsets[i] >> (8 * b)) & 0xFF);
        }
    }
    write_file_bytes(path, bytes);
}

std::vector<FrameMeasurements> load_gfms_frames(const std::filesystem::path& path) {
    const MeasurementSet set = load_gfms(path);  // validates the base container
    const auto bytes = read_file_bytes(path);
    const std::string ctx = "GFMS " + path.string();
    const std::size_t n = set.records.size();
    const std::size_t base_end = 4 + 2 + 2 + 4 * 4 + 8 +
                                 n * set.records.front().samples.size() * 8;
    if (bytes.size() <= base_end) {
        throw FormatError(ctx + ": no frame table present");
    }
    bin::Reader r(bytes.data() + base_end, bytes.size() - base_end, ctx + " frame table");
    char tag[4];
    r.bytes(reinterpret_cast<unsigned char*>(tag), 4);
    if (std::string(tag, 4) != "FRMT") {
        throw FormatError(ctx + ": bad frame table tag \"" + std::string(tag, 4) + "\"");
    }
    const std::uint32_t f = r.u32();
    std::vector<std::uint64_t> offsets(f);
    for (auto& o : offsets) o = r.u64();
    std::vector<FrameMeasurements> frames(f);
    for (std::uint32_t i = 0; i < f; ++i) {
        if (offsets[i] + n * 8 > bytes.size()) {
            throw FormatError(ctx + ": frame " + std::to_string(i) +
                              " offset outside the file");
        }
        bin::Reader fr(bytes.data() + offsets[i], n * 8, ctx + " frame payload");
        frames[i].frame_index = static_cast<int>(i);
        frames[i].values.resize(n);
        for (double& v : frames[i].values) v = fr.f64();
    }
    return frames;
}

}  // namespace spgi
