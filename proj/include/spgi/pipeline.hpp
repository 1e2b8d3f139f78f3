#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spgi/acquisition.hpp"
#include "spgi/demux.hpp"
#include "spgi/patterns.hpp"
#include "spgi/recon.hpp"
#include "spgi/scene.hpp"

namespace spgi {

/// Fully resolved run configuration; the plain-text config (config.hpp) maps
/// onto this one to one.
struct PipelineConfig {
    Grid grid{64, 64, 6.5};

    // diffuser scan
    std::uint64_t diffuser_seed = 42;
    double feature_size_px = 3.0;
    int realizations = 1000;
    std::string scan_style = "jittered";  // jittered | raster
    int scan_spacing_px = 0;              // 0 = derive from feature size
    int master_height = 0;                // 0 = derive from the scan
    int master_width = 0;

    // scene
    std::string scene_kind = "chopper";  // chopper | static_mask | sampled_sequence
    double chopping_frequency_hz = 200.0;
    int blade_count = 10;
    double duty_cycle = 0.5;
    double beam_radius_mm = 4.8;
    double jitter_deg = 0.0;
    std::uint64_t jitter_seed = 1;
    double opening_phase = -1.0;  // negative = auto
    std::string mask_path;        // static_mask / sampled_sequence payload

    // camera
    CameraModel camera{};

    // sampling
    SamplingConfig sampling{};
    double target_counts = 0.0;  // > 0 calibrates photon_scale per measurement

    // reconstruction
    std::string method = "tv";  // tv | correlation
    TvConfig tv{};
    Preprocessing preprocessing = Preprocessing::raw;

    // metrics
    int roi_margin = 2;
    int analysis_frame = -1;  // negative = frame with the edge nearest center

    // output
    std::string out_dir = "out";
    std::vector<std::string> formats{"pgm"};

    int threads = 1;
};

SceneModel build_scene(const PipelineConfig& cfg);
PatternStack build_patterns(const PipelineConfig& cfg);

struct SimulationProducts {
    PatternStack reference;       // as recorded by the camera model
    MeasurementSet measurements;  // all records
    double photon_scale = 1.0;    // resolved calibration
    int samples_per_cycle = 0;
};

/// Two-step acquisition for the configured scan and scene.
SimulationProducts run_simulation(const PipelineConfig& cfg);

/// b is divided by this to express reconstructions in transmission units.
double measurement_scale(const PipelineConfig& cfg, double resolved_photon_scale);

/// Jitter-free ground-truth transmission of a frame.
Image ground_truth_frame(const SceneModel& scene, int frame, int samples_per_cycle);

/// Frame whose blade edge lies nearest the FOV center; falls back to frame 0
/// for scenes without an edge.
int pick_analysis_frame(const SceneModel& scene, int samples_per_cycle);

/// Reconstruct one frame by the configured method (tv | correlation).
Image reconstruct_frame(const PipelineConfig& cfg, const PatternStack& reference,
                        const FrameMeasurements& frame, double resolved_photon_scale);

struct SimulationArtifacts {
    std::filesystem::path reference;
    std::filesystem::path measurements;
    std::filesystem::path manifest;
};

/// Write reference.gfps, measurements.gfms and manifest.cfg; rerunning the
/// manifest reproduces the files byte for byte.
SimulationArtifacts write_simulation_artifacts(const PipelineConfig& cfg,
                                               const SimulationProducts& products,
                                               const std::filesystem::path& out_dir);

}  // namespace spgi
