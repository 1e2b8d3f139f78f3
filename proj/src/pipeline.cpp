#include "spgi/pipeline.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "spgi/config.hpp"
#include "spgi/io.hpp"

namespace spgi {

SceneModel build_scene(const PipelineConfig& cfg) {
    if (cfg.scene_kind == "chopper") {
        ChopperGeometry geom;
        geom.blade_count = cfg.blade_count;
        geom.duty_cycle = cfg.duty_cycle;
        geom.rotation_frequency_hz = cfg.chopping_frequency_hz / cfg.blade_count;
        geom.beam_center_radius_mm = cfg.beam_radius_mm;
        geom.jitter_sigma_deg = cfg.jitter_deg;
        geom.jitter_seed = cfg.jitter_seed;
        geom.opening_phase = cfg.opening_phase;
        return SceneModel::make_chopper(cfg.grid, geom);
    }
    if (cfg.scene_kind == "static_mask") {
        if (cfg.mask_path.empty()) {
            throw std::invalid_argument("build_scene: static_mask needs scene.mask_path");
        }
        return SceneModel::make_static(cfg.grid, load_gfim(cfg.mask_path),
                                       cfg.chopping_frequency_hz);
    }
    if (cfg.scene_kind == "sampled_sequence") {
        if (cfg.mask_path.empty()) {
            throw std::invalid_argument("build_scene: sampled_sequence needs scene.mask_path");
        }
        return SceneModel::make_sampled(cfg.grid, load_stack(cfg.mask_path),
                                        cfg.chopping_frequency_hz);
    }
    throw std::invalid_argument("build_scene: unknown scene kind \"" + cfg.scene_kind + "\"");
}

PatternStack build_patterns(const PipelineConfig& cfg) {
    const int spacing =
        cfg.scan_spacing_px > 0 ? cfg.scan_spacing_px : default_scan_spacing(cfg.feature_size_px);
    int mh = cfg.master_height;
    int mw = cfg.master_width;
    std::vector<ScanOffset> offsets;
    if (cfg.scan_style == "jittered") {
        if (mh == 0 || mw == 0) {
            const auto dims = master_dims_for_scan(cfg.realizations, cfg.grid, spacing);
            mh = dims.first;
            mw = dims.second;
        }
        offsets = jittered_scan_offsets(cfg.realizations, cfg.grid, mh, mw, spacing,
                                        cfg.diffuser_seed);
    } else if (cfg.scan_style == "raster") {
        if (mh == 0 || mw == 0) {
            const int cells =
                static_cast<int>(std::ceil(std::sqrt(static_cast<double>(cfg.realizations))));
            mh = cells * cfg.grid.height;
            mw = cells * cfg.grid.width;
        }
        offsets = raster_scan_offsets(cfg.realizations, cfg.grid, mh, mw);
    } else {
        throw std::invalid_argument("build_patterns: unknown scan style \"" + cfg.scan_style +
                                    "\"");
    }
    const DiffuserMap map = generate_diffuser(cfg.diffuser_seed, mh, mw, cfg.feature_size_px);
    return cut_patterns(map, cfg.grid, offsets);
}

SimulationProducts run_simulation(const PipelineConfig& cfg) {
    const SceneModel scene = build_scene(cfg);
    const PatternStack stack = build_patterns(cfg);
    SamplingConfig sampling = cfg.sampling;
    const int spc = samples_per_cycle(sampling, scene.chopping_frequency_hz());
    if (cfg.target_counts > 0.0) {
        sampling.photon_scale = calibrate_photon_scale(
            stack, scene, spc, sampling.cycles_per_realization, cfg.target_counts);
    }
    const CameraModel* camera = cfg.camera.enabled ? &cfg.camera : nullptr;
    Campaign campaign = run_campaign(stack, scene, sampling, camera, cfg.threads);

    SimulationProducts products;
    products.reference = std::move(campaign.reference);
    products.measurements.records = std::move(campaign.records);
    products.measurements.samples_per_cycle = spc;
    products.measurements.cycles = sampling.cycles_per_realization;
    products.measurements.sample_rate_hz = sampling.sample_rate_hz;
    products.photon_scale = sampling.photon_scale;
    products.samples_per_cycle = spc;
    return products;
}

double measurement_scale(const PipelineConfig& cfg, double resolved_photon_scale) {
    return resolved_photon_scale * cfg.sampling.cycles_per_realization;
}

Image ground_truth_frame(const SceneModel& scene, int frame, int samples_per_cycle) {
    if (frame < 0 || frame >= samples_per_cycle) {
        throw std::out_of_range("ground_truth_frame: frame out of range");
    }
    return scene.transmission_at(
        CyclePhase{0, static_cast<double>(frame) / samples_per_cycle}, false);
}

int pick_analysis_frame(const SceneModel& scene, int samples_per_cycle) {
    if (scene.kind() != SceneKind::chopper) return 0;
    int best = 0;
    double best_abs = std::numeric_limits<double>::infinity();
    for (int f = 0; f < samples_per_cycle; ++f) {
        const auto pos = scene.edge_position(
            CyclePhase{0, static_cast<double>(f) / samples_per_cycle}, false);
        if (pos && std::fabs(*pos) < best_abs) {
            best_abs = std::fabs(*pos);
            best = f;
        }
    }
    return best;
}

Image reconstruct_frame(const PipelineConfig& cfg, const PatternStack& reference,
                        const FrameMeasurements& frame, double resolved_photon_scale) {
    if (cfg.method == "correlation") {
        return correlate_gi(reference, frame);
    }
    if (cfg.method == "tv") {
        SensingSystem sys = make_sensing_system(reference, frame,
                                                measurement_scale(cfg, resolved_photon_scale),
                                                cfg.preprocessing);
        return reconstruct_tv(sys, cfg.tv).image;
    }
    throw std::invalid_argument("reconstruct_frame: unknown method \"" + cfg.method + "\"");
}

SimulationArtifacts write_simulation_artifacts(const PipelineConfig& cfg,
                                               const SimulationProducts& products,
                                               const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    SimulationArtifacts paths;
    paths.reference = out_dir / "reference.gfps";
    paths.measurements = out_dir / "measurements.gfms";
    paths.manifest = out_dir / "manifest.cfg";

    save_stack(products.reference, paths.reference);
    save_gfms(products.measurements, paths.measurements);

    PipelineConfig resolved = cfg;
    resolved.sampling.photon_scale = products.photon_scale;
    resolved.target_counts = 0.0;  // calibration already folded into photon_scale
    write_manifest(resolved, paths.manifest);
    return paths;
}

}  // namespace spgi
