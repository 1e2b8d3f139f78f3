#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "spgi/patterns.hpp"
#include "spgi/scene.hpp"

namespace spgi {

/// 2D camera recording the reference patterns; the PSF is Gaussian.
struct CameraModel {
    double pixel_pitch_um = 6.5;
    double blur_fwhm_um = 0.0;
    bool enabled = false;
};

enum class NoiseKind { none, poisson };

struct SamplingConfig {
    double sample_rate_hz = 100e3;
    int cycles_per_realization = 1;
    /// Expected counts per unit of sum(pattern * transmission).
    double photon_scale = 1.0;
    NoiseKind noise = NoiseKind::none;
    std::uint64_t noise_seed = 0;
    /// Optional systematic noise floor: additive Gaussian with sigma equal to
    /// this fraction of the expected sample value. Off at 0.
    double systematic_noise_frac = 0.0;
};

/// Single-pixel time series for one diffuser position, all cycles kept.
struct AcquisitionRecord {
    int realization_index = 0;
    std::vector<double> samples;            // samples_per_cycle * cycles counts
    std::vector<std::size_t> sync_indices;  // cycle starts, first at 0
};

/// Validated integer number of samples per chopping cycle.
int samples_per_cycle(const SamplingConfig& sampling, double chopping_frequency_hz);

/// Reference patterns as recorded by the camera (Gaussian PSF, replicate
/// boundary). Disabled camera returns the stack unchanged.
PatternStack capture_reference(const PatternStack& stack, const CameraModel& camera);

/// Bucket value photon_scale * sum_xy pattern * transmission. Accumulation is
/// row-major; the order is part of the contract (demultiplexed frames must
/// reproduce it bit-for-bit).
double bucket_value(std::span<const double> pattern, const Image& transmission,
                    double photon_scale);

/// Ideal noiseless detector value for one pattern at one instant.
double ideal_signal(const Image& pattern, const SceneModel& scene, const CyclePhase& cp,
                    double photon_scale = 1.0);
double ideal_signal(const Image& pattern, const SceneModel& scene, double t_seconds,
                    double photon_scale = 1.0);

/// Full per-cycle time series for one realization. Sample k of cycle c is the
/// ideal signal at in-cycle phase k/S with that cycle's jitter; shot noise is
/// keyed by (noise_seed, realization, cycle, sample).
AcquisitionRecord simulate_record(const Image& pattern, const SceneModel& scene,
                                  const SamplingConfig& sampling, int realization_index);

struct Campaign {
    std::vector<AcquisitionRecord> records;
    PatternStack reference;
};

/// Two-step acquisition: camera capture of the reference stack plus one
/// single-pixel record per realization. Realization r occupies global cycles
/// [r*cycles, (r+1)*cycles), so the jitter stream is independent of execution
/// order.
Campaign run_campaign(const PatternStack& stack, const SceneModel& scene,
                      const SamplingConfig& sampling, const CameraModel* camera = nullptr,
                      int threads = 1);

/// photon_scale such that the campaign mean counts per measurement (one
/// realization, one frame, cycles summed) equals target_counts.
double calibrate_photon_scale(const PatternStack& stack, const SceneModel& scene,
                              int samples_per_cycle, int cycles, double target_counts);

/// GFMS measurement container (binary, little-endian): magic "GFMS",
/// u16 version = 1, u16 reserved, u32 N, u32 S, u32 samples_per_cycle,
/// u32 cycles, f64 sample_rate_hz, then N*S f64 counts realization-major.
struct MeasurementSet {
    std::vector<AcquisitionRecord> records;
    int samples_per_cycle = 0;
    int cycles = 0;
    double sample_rate_hz = 0.0;
};

void save_gfms(const MeasurementSet& set, const std::filesystem::path& path);
MeasurementSet load_gfms(const std::filesystem::path& path);

/// CSV export, header "realization,sample,counts".
void export_records_csv(const MeasurementSet& set, const std::filesystem::path& path);

}  // namespace spgi
