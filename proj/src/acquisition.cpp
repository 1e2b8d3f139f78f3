#include "spgi/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "spgi/io.hpp"
#include "spgi/parallel.hpp"
#include "spgi/rng.hpp"

namespace spgi {

namespace {

// Largest count exactly representable alongside its Poisson spread.
constexpr double kMaxCounts = 9.0e15;

/// Separable Gaussian blur with replicate boundary; constants stay constant.
void gaussian_blur_replicate(std::span<double> img, int height, int width, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    if (radius < 1) return;
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0.0;
    for (int j = -radius; j <= radius; ++j) {
        kernel[j + radius] = std::exp(-0.5 * (j * j) / (sigma * sigma));
        norm += kernel[j + radius];
    }
    for (double& k : kernel) k /= norm;

    std::vector<double> tmp(img.size());
    for (int y = 0; y < height; ++y) {
        const double* src = img.data() + static_cast<std::size_t>(y) * width;
        double* dst = tmp.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            double acc = 0.0;
            for (int j = -radius; j <= radius; ++j) {
                const int xx = std::clamp(x + j, 0, width - 1);
                acc += kernel[j + radius] * src[xx];
            }
            dst[x] = acc;
        }
    }
    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y) {
            double acc = 0.0;
            for (int j = -radius; j <= radius; ++j) {
                const int yy = std::clamp(y + j, 0, height - 1);
                acc += kernel[j + radius] * tmp[static_cast<std::size_t>(yy) * width + x];
            }
            img[static_cast<std::size_t>(y) * width + x] = acc;
        }
    }
}

double apply_noise(double expected, const SamplingConfig& sampling, int realization,
                   int cycle, int sample) {
    if (!(expected >= 0.0)) {
        throw std::domain_error("sample expectation must be nonnegative and finite");
    }
    if (expected > kMaxCounts) {
        throw std::overflow_error("expected counts " + std::to_string(expected) +
                                  " overflow the count representation");
    }
    double value = expected;
    if (sampling.noise == NoiseKind::poisson) {
        Rng rng = rng_stream(sampling.noise_seed,
                             {rng_tag::shot_noise, static_cast<std::uint64_t>(realization),
                              static_cast<std::uint64_t>(cycle),
                              static_cast<std::uint64_t>(sample)});
        value = static_cast<double>(rng.next_poisson(expected));
    }
    if (sampling.systematic_noise_frac > 0.0) {
        Rng rng = rng_stream(sampling.noise_seed,
                             {rng_tag::systematic_noise, static_cast<std::uint64_t>(realization),
                              static_cast<std::uint64_t>(cycle),
                              static_cast<std::uint64_t>(sample)});
        value += rng.next_gaussian() * sampling.systematic_noise_frac * expected;
        if (value < 0.0) value = 0.0;
    }
    return value;
}

/// Record assembled from per-(cycle, sample) expectations supplied by `expect`.
AcquisitionRecord build_record(const SamplingConfig& sampling, int spc, int realization,
                               const std::function<double(int, int)>& expect) {
    AcquisitionRecord rec;
    rec.realization_index = realization;
    rec.samples.resize(static_cast<std::size_t>(spc) * sampling.cycles_per_realization);
    rec.sync_indices.reserve(sampling.cycles_per_realization);
    for (int c = 0; c < sampling.cycles_per_realization; ++c) {
        rec.sync_indices.push_back(static_cast<std::size_t>(c) * spc);
        for (int k = 0; k < spc; ++k) {
            rec.samples[static_cast<std::size_t>(c) * spc + k] =
                apply_noise(expect(c, k), sampling, realization, c, k);
        }
    }
    return rec;
}

}  // namespace

int samples_per_cycle(const SamplingConfig& sampling, double chopping_frequency_hz) {
    if (sampling.sample_rate_hz <= 0.0 || chopping_frequency_hz <= 0.0) {
        throw std::invalid_argument("samples_per_cycle: rates must be positive");
    }
    if (sampling.cycles_per_realization < 1) {
        throw std::invalid_argument("samples_per_cycle: cycles_per_realization must be >= 1");
    }
    const double ratio = sampling.sample_rate_hz / chopping_frequency_hz;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::fabs(ratio - rounded) > 1e-9 * rounded) {
        throw std::invalid_argument(
            "samples_per_cycle: sample rate must be an integer multiple of the chopping "
            "frequency, got ratio " + std::to_string(ratio));
    }
    return static_cast<int>(rounded);
}

PatternStack capture_reference(const PatternStack& stack, const CameraModel& camera) {
    if (stack.count() < 1) throw std::invalid_argument("capture_reference: empty stack");
    if (camera.blur_fwhm_um < 0.0) {
        throw std::invalid_argument("capture_reference: negative blur");
    }
    PatternStack out = stack;
    if (!camera.enabled || camera.blur_fwhm_um == 0.0) return out;
    const double sigma_px = camera.blur_fwhm_um / 2.3548200450309493 / stack.pixel_pitch_um;
    for (int r = 0; r < out.count(); ++r) {
        gaussian_blur_replicate(out.pattern(r), out.height, out.width, sigma_px);
    }
    return out;
}

double bucket_value(std::span<const double> pattern, const Image& transmission,
                    double photon_scale) {
    if (pattern.size() != transmission.data.size()) {
        throw std::invalid_argument("bucket_value: pattern and transmission grids differ");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < pattern.size(); ++i) acc += pattern[i] * transmission.data[i];
    return photon_scale * acc;
}

double ideal_signal(const Image& pattern, const SceneModel& scene, const CyclePhase& cp,
                    double photon_scale) {
    if (pattern.height != scene.grid().height || pattern.width != scene.grid().width) {
        throw std::invalid_argument("ideal_signal: pattern and scene grids differ");
    }
    const Image t = scene.transmission_at(cp, true);
    return bucket_value({pattern.data.data(), pattern.data.size()}, t, photon_scale);
}

double ideal_signal(const Image& pattern, const SceneModel& scene, double t_seconds,
                    double photon_scale) {
    return ideal_signal(pattern, scene,
                        SceneModel::to_cycle_phase(t_seconds, scene.chopping_frequency_hz()),
                        photon_scale);
}

AcquisitionRecord simulate_record(const Image& pattern, const SceneModel& scene,
                                  const SamplingConfig& sampling, int realization_index) {
    const int spc = samples_per_cycle(sampling, scene.chopping_frequency_hz());
    if (pattern.height != scene.grid().height || pattern.width != scene.grid().width) {
        throw std::invalid_argument("simulate_record: pattern and scene grids differ");
    }
    const std::span<const double> pat{pattern.data.data(), pattern.data.size()};
    const std::int64_t cycle0 =
        static_cast<std::int64_t>(realization_index) * sampling.cycles_per_realization;
    return build_record(sampling, spc, realization_index, [&](int c, int k) {
        const CyclePhase cp{cycle0 + c, static_cast<double>(k) / spc};
        return bucket_value(pat, scene.transmission_at(cp, true), sampling.photon_scale);
    });
}

Campaign run_campaign(const PatternStack& stack, const SceneModel& scene,
                      const SamplingConfig& sampling, const CameraModel* camera,
                      int threads) {
    if (stack.count() < 1) throw std::invalid_argument("run_campaign: empty pattern stack");
    if (stack.height != scene.grid().height || stack.width != scene.grid().width) {
        throw std::invalid_argument("run_campaign: pattern and scene grids differ");
    }
    const int spc = samples_per_cycle(sampling, scene.chopping_frequency_hz());
    const int n = stack.count();

    const bool jitter_free = scene.kind() != SceneKind::chopper ||
                             scene.chopper().jitter_sigma_deg == 0.0;

    Campaign out;
    out.records.resize(n);

    if (jitter_free) {
        // One transmission per in-cycle index, shared by every cycle and
        // realization; values match the per-sample path bit for bit.
        std::vector<Image> frames;
        frames.reserve(spc);
        for (int k = 0; k < spc; ++k) {
            frames.push_back(
                scene.transmission_at(CyclePhase{0, static_cast<double>(k) / spc}, true));
        }
        parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t r) {
            const std::span<const double> pat = stack.pattern(static_cast<int>(r));
            std::vector<double> per_frame(spc);
            for (int k = 0; k < spc; ++k) {
                per_frame[k] = bucket_value(pat, frames[k], sampling.photon_scale);
            }
            out.records[r] = build_record(sampling, spc, static_cast<int>(r),
                                          [&](int, int k) { return per_frame[k]; });
        });
    } else {
        parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t r) {
            out.records[r] =
                simulate_record(stack.pattern_image(static_cast<int>(r)), scene, sampling,
                                static_cast<int>(r));
        });
    }

    out.reference = camera ? capture_reference(stack, *camera) : stack;
    return out;
}

double calibrate_photon_scale(const PatternStack& stack, const SceneModel& scene,
                              int samples_per_cycle, int cycles, double target_counts) {
    if (stack.count() < 1) throw std::invalid_argument("calibrate_photon_scale: empty stack");
    if (samples_per_cycle < 1 || cycles < 1 || target_counts <= 0.0) {
        throw std::invalid_argument("calibrate_photon_scale: invalid arguments");
    }
    // mean over (r, f) of <I_r, T_f> factorizes into <mean pattern, mean frame>.
    Image mean_pattern(stack.height, stack.width);
    for (int r = 0; r < stack.count(); ++r) {
        const auto p = stack.pattern(r);
        for (std::size_t i = 0; i < p.size(); ++i) mean_pattern.data[i] += p[i];
    }
    for (double& v : mean_pattern.data) v /= stack.count();

    Image mean_frame(stack.height, stack.width);
    for (int k = 0; k < samples_per_cycle; ++k) {
        const Image t = scene.transmission_at(
            CyclePhase{0, static_cast<double>(k) / samples_per_cycle}, false);
        for (std::size_t i = 0; i < t.data.size(); ++i) mean_frame.data[i] += t.data[i];
    }
    for (double& v : mean_frame.data) v /= samples_per_cycle;

    double mean_bucket = 0.0;
    for (std::size_t i = 0; i < mean_pattern.data.size(); ++i) {
        mean_bucket += mean_pattern.data[i] * mean_frame.data[i];
    }
    if (mean_bucket <= 0.0) {
        throw std::invalid_argument("calibrate_photon_scale: scene blocks all patterns");
    }
    return target_counts / (cycles * mean_bucket);
}

void save_gfms(const MeasurementSet& set, const std::filesystem::path& path) {
    const int n = static_cast<int>(set.records.size());
    if (n < 1) throw std::invalid_argument("save_gfms: no records");
    const std::size_t s = set.records.front().samples.size();
    if (s != static_cast<std::size_t>(set.samples_per_cycle) * set.cycles) {
        throw std::invalid_argument("save_gfms: sample count does not match cycle layout");
    }
    for (const auto& rec : set.records) {
        if (rec.samples.size() != s) {
            throw std::invalid_argument("save_gfms: inconsistent record lengths");
        }
    }
    std::vector<unsigned char> bytes;
    bytes.insert(bytes.end(), {'G', 'F', 'M', 'S'});
    bin::put_u16(bytes, 1);
    bin::put_u16(bytes, 0);
    bin::put_u32(bytes, static_cast<std::uint32_t>(n));
    bin::put_u32(bytes, static_cast<std::uint32_t>(s));
    bin::put_u32(bytes, static_cast<std::uint32_t>(set.samples_per_cycle));
    bin::put_u32(bytes, static_cast<std::uint32_t>(set.cycles));
    bin::put_f64(bytes, set.sample_rate_hz);
    bytes.reserve(bytes.size() + static_cast<std::size_t>(n) * s * 8);
    for (const auto& rec : set.records) {
        for (double v : rec.samples) bin::put_f64(bytes, v);
    }
    write_file_bytes(path, bytes);
}

MeasurementSet load_gfms(const std::filesystem::path& path) {
    const auto bytes = read_file_bytes(path);
    const std::string ctx = "GFMS " + path.string();
    bin::Reader r(bytes.data(), bytes.size(), ctx);
    char magic[4];
    r.bytes(reinterpret_cast<unsigned char*>(magic), 4);
    if (std::string(magic, 4) != "GFMS") {
        throw FormatError(ctx + ": bad magic \"" + std::string(magic, 4) + "\"");
    }
    const std::uint16_t version = r.u16();
    if (version != 1) {
        throw FormatError(ctx + ": unsupported format version " + std::to_string(version));
    }
    r.u16();
    const std::uint64_t n = r.u32();
    const std::uint64_t s = r.u32();
    const std::uint64_t spc = r.u32();
    const std::uint64_t cycles = r.u32();
    const double rate = r.f64();
    if (n == 0 || s == 0 || spc == 0 || cycles == 0) {
        throw FormatError(ctx + ": zero dimension in header");
    }
    if (spc * cycles != s) {
        throw FormatError(ctx + ": samples " + std::to_string(s) +
                          " do not match samples_per_cycle*cycles = " +
                          std::to_string(spc * cycles));
    }
    if (s > (1ULL << 40) || n > (1ULL << 40) / s) {
        throw FormatError(ctx + ": dimension overflow, " + std::to_string(n) + "x" +
                          std::to_string(s));
    }
    const std::uint64_t expected = n * s * 8;
    if (r.remaining() < expected) {
        throw FormatError(ctx + ": payload size mismatch, expected " + std::to_string(expected) +
                          " bytes, have " + std::to_string(r.remaining()));
    }
    MeasurementSet set;
    set.samples_per_cycle = static_cast<int>(spc);
    set.cycles = static_cast<int>(cycles);
    set.sample_rate_hz = rate;
    set.records.resize(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        auto& rec = set.records[i];
        rec.realization_index = static_cast<int>(i);
        rec.samples.resize(s);
        for (double& v : rec.samples) v = r.f64();
        for (std::uint64_t c = 0; c < cycles; ++c) rec.sync_indices.push_back(c * spc);
    }
    return set;
}

void export_records_csv(const MeasurementSet& set, const std::filesystem::path& path) {
    std::string text = "realization,sample,counts\n";
    for (const auto& rec : set.records) {
        for (std::size_t k = 0; k < rec.samples.size(); ++k) {
            text += std::to_string(rec.realization_index);
            text += ',';
            text += std::to_string(k);
            text += ',';
            text += format_double(rec.samples[k]);
            text += '\n';
        }
    }
    std::vector<unsigned char> bytes(text.begin(), text.end());
    write_file_bytes(path, bytes);
}

}  // namespace spgi
