#include "spgi/config.hpp"

#include <charconv>
#include <cstdint>
#include <map>
#include <sstream>
#include <vector>

#include "spgi/io.hpp"

namespace spgi {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

struct KeyValues {
    std::map<std::string, std::string> values;
    std::map<std::string, int> lines;
    std::string origin;

    bool take(const std::string& key, std::string& out) {
        auto it = values.find(key);
        if (it == values.end()) return false;
        out = it->second;
        values.erase(it);
        return true;
    }

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        auto it = lines.find(key);
        const std::string where =
            it == lines.end() ? origin : origin + ":" + std::to_string(it->second);
        throw ConfigError(where + ": key \"" + key + "\" " + message);
    }
};

double parse_double(KeyValues& kv, const std::string& key, const std::string& raw) {
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != raw.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        kv.fail(key, "has a malformed number \"" + raw + "\"");
    }
}

long long parse_int(KeyValues& kv, const std::string& key, const std::string& raw) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc() || ptr != raw.data() + raw.size()) {
        kv.fail(key, "has a malformed integer \"" + raw + "\"");
    }
    return v;
}

std::uint64_t parse_u64(KeyValues& kv, const std::string& key, const std::string& raw) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
    if (ec != std::errc() || ptr != raw.data() + raw.size()) {
        kv.fail(key, "has a malformed unsigned integer \"" + raw + "\"");
    }
    return v;
}

bool parse_bool(KeyValues& kv, const std::string& key, const std::string& raw) {
    if (raw == "true" || raw == "1" || raw == "on") return true;
    if (raw == "false" || raw == "0" || raw == "off") return false;
    kv.fail(key, "must be true/false, got \"" + raw + "\"");
}

void get_double(KeyValues& kv, const std::string& key, double& out) {
    std::string raw;
    if (kv.take(key, raw)) out = parse_double(kv, key, raw);
}

void get_int(KeyValues& kv, const std::string& key, int& out) {
    std::string raw;
    if (kv.take(key, raw)) out = static_cast<int>(parse_int(kv, key, raw));
}

void get_u64(KeyValues& kv, const std::string& key, std::uint64_t& out) {
    std::string raw;
    if (kv.take(key, raw)) out = parse_u64(kv, key, raw);
}

void get_bool(KeyValues& kv, const std::string& key, bool& out) {
    std::string raw;
    if (kv.take(key, raw)) out = parse_bool(kv, key, raw);
}

void get_string(KeyValues& kv, const std::string& key, std::string& out) {
    std::string raw;
    if (kv.take(key, raw)) out = raw;
}

}  // namespace

PipelineConfig parse_run_config(const std::string& text, const std::filesystem::path& dir,
                                const std::string& origin) {
    KeyValues kv;
    kv.origin = origin;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected \"key = value\", got \"" + stripped + "\"");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": empty key or value");
        }
        if (kv.values.count(key)) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key \"" +
                              key + "\"");
        }
        kv.values[key] = value;
        kv.lines[key] = line_no;
    }

    PipelineConfig cfg;
    get_int(kv, "grid.height", cfg.grid.height);
    get_int(kv, "grid.width", cfg.grid.width);
    get_double(kv, "grid.pixel_pitch_um", cfg.grid.pixel_pitch_um);

    get_u64(kv, "diffuser.seed", cfg.diffuser_seed);
    get_double(kv, "diffuser.feature_size_px", cfg.feature_size_px);
    get_int(kv, "diffuser.count", cfg.realizations);
    get_string(kv, "diffuser.scan", cfg.scan_style);
    get_int(kv, "diffuser.spacing_px", cfg.scan_spacing_px);
    get_int(kv, "diffuser.master_height", cfg.master_height);
    get_int(kv, "diffuser.master_width", cfg.master_width);

    get_string(kv, "scene.kind", cfg.scene_kind);
    get_double(kv, "scene.chopping_frequency_hz", cfg.chopping_frequency_hz);
    get_int(kv, "scene.blade_count", cfg.blade_count);
    get_double(kv, "scene.duty_cycle", cfg.duty_cycle);
    get_double(kv, "scene.beam_radius_mm", cfg.beam_radius_mm);
    get_double(kv, "scene.jitter_deg", cfg.jitter_deg);
    get_u64(kv, "scene.jitter_seed", cfg.jitter_seed);
    get_double(kv, "scene.opening_phase", cfg.opening_phase);
    std::string mask;
    if (kv.take("scene.mask_path", mask)) {
        cfg.mask_path = (dir / mask).lexically_normal().string();
    }

    get_bool(kv, "camera.enabled", cfg.camera.enabled);
    get_double(kv, "camera.blur_fwhm_um", cfg.camera.blur_fwhm_um);
    cfg.camera.pixel_pitch_um = cfg.grid.pixel_pitch_um;

    get_double(kv, "sampling.sample_rate_hz", cfg.sampling.sample_rate_hz);
    get_int(kv, "sampling.cycles", cfg.sampling.cycles_per_realization);
    get_double(kv, "sampling.photon_scale", cfg.sampling.photon_scale);
    get_double(kv, "sampling.target_counts", cfg.target_counts);
    std::string noise;
    if (kv.take("sampling.noise", noise)) {
        if (noise == "none") {
            cfg.sampling.noise = NoiseKind::none;
        } else if (noise == "poisson") {
            cfg.sampling.noise = NoiseKind::poisson;
        } else {
            kv.fail("sampling.noise", "must be none or poisson, got \"" + noise + "\"");
        }
    }
    get_u64(kv, "sampling.noise_seed", cfg.sampling.noise_seed);
    get_double(kv, "sampling.systematic_noise_frac", cfg.sampling.systematic_noise_frac);

    get_string(kv, "recon.method", cfg.method);
    get_double(kv, "recon.mu", cfg.tv.mu);
    get_double(kv, "recon.beta", cfg.tv.beta);
    get_double(kv, "recon.tol", cfg.tv.outer_tol);
    get_int(kv, "recon.max_outer", cfg.tv.max_outer);
    get_int(kv, "recon.inner_steps", cfg.tv.inner_steps);
    get_bool(kv, "recon.nonneg", cfg.tv.nonneg);
    std::string prep;
    if (kv.take("recon.preprocessing", prep)) {
        if (prep == "raw") {
            cfg.preprocessing = Preprocessing::raw;
        } else if (prep == "mean_centered") {
            cfg.preprocessing = Preprocessing::mean_centered;
        } else {
            kv.fail("recon.preprocessing",
                    "must be raw or mean_centered, got \"" + prep + "\"");
        }
    }

    get_int(kv, "metrics.roi_margin", cfg.roi_margin);
    get_int(kv, "metrics.frame", cfg.analysis_frame);

    std::string out_dir;
    if (kv.take("output.dir", out_dir)) {
        cfg.out_dir = (dir / out_dir).lexically_normal().string();
    }
    std::string formats;
    if (kv.take("output.formats", formats)) {
        cfg.formats.clear();
        std::istringstream fs(formats);
        std::string item;
        while (std::getline(fs, item, ',')) {
            item = trim(item);
            if (item != "pgm" && item != "gfim" && item != "csv") {
                kv.fail("output.formats", "has unknown format \"" + item + "\"");
            }
            cfg.formats.push_back(item);
        }
    }

    if (!kv.values.empty()) {
        std::string msg = origin + ": unknown configuration keys:";
        for (const auto& [key, value] : kv.values) {
            msg += " \"" + key + "\" (line " + std::to_string(kv.lines.at(key)) + ")";
        }
        throw ConfigError(msg);
    }
    return cfg;
}

PipelineConfig load_run_config(const std::filesystem::path& file) {
    const auto bytes = read_file_bytes(file);
    const std::string text(bytes.begin(), bytes.end());
    return parse_run_config(text, file.parent_path(), file.string());
}

void write_manifest(const PipelineConfig& cfg, const std::filesystem::path& path) {
    std::string t;
    t += "# spgi run manifest (format versions: GFPS 1, GFMS 1)\n";
    t += "grid.height = " + std::to_string(cfg.grid.height) + "\n";
    t += "grid.width = " + std::to_string(cfg.grid.width) + "\n";
    t += "grid.pixel_pitch_um = " + format_double(cfg.grid.pixel_pitch_um) + "\n";
    t += "diffuser.seed = " + std::to_string(cfg.diffuser_seed) + "\n";
    t += "diffuser.feature_size_px = " + format_double(cfg.feature_size_px) + "\n";
    t += "diffuser.count = " + std::to_string(cfg.realizations) + "\n";
    t += "diffuser.scan = " + cfg.scan_style + "\n";
    t += "diffuser.spacing_px = " + std::to_string(cfg.scan_spacing_px) + "\n";
    t += "diffuser.master_height = " + std::to_string(cfg.master_height) + "\n";
    t += "diffuser.master_width = " + std::to_string(cfg.master_width) + "\n";
    t += "scene.kind = " + cfg.scene_kind + "\n";
    t += "scene.chopping_frequency_hz = " + format_double(cfg.chopping_frequency_hz) + "\n";
    t += "scene.blade_count = " + std::to_string(cfg.blade_count) + "\n";
    t += "scene.duty_cycle = " + format_double(cfg.duty_cycle) + "\n";
    t += "scene.beam_radius_mm = " + format_double(cfg.beam_radius_mm) + "\n";
    t += "scene.jitter_deg = " + format_double(cfg.jitter_deg) + "\n";
    t += "scene.jitter_seed = " + std::to_string(cfg.jitter_seed) + "\n";
    t += "scene.opening_phase = " + format_double(cfg.opening_phase) + "\n";
    if (!cfg.mask_path.empty()) t += "scene.mask_path = " + cfg.mask_path + "\n";
    t += "camera.enabled = " + std::string(cfg.camera.enabled ? "true" : "false") + "\n";
    t += "camera.blur_fwhm_um = " + format_double(cfg.camera.blur_fwhm_um) + "\n";
    t += "sampling.sample_rate_hz = " + format_double(cfg.sampling.sample_rate_hz) + "\n";
    t += "sampling.cycles = " + std::to_string(cfg.sampling.cycles_per_realization) + "\n";
    t += "sampling.photon_scale = " + format_double(cfg.sampling.photon_scale) + "\n";
    t += "sampling.target_counts = " + format_double(cfg.target_counts) + "\n";
    t += "sampling.noise = " +
         std::string(cfg.sampling.noise == NoiseKind::poisson ? "poisson" : "none") + "\n";
    t += "sampling.noise_seed = " + std::to_string(cfg.sampling.noise_seed) + "\n";
    t += "sampling.systematic_noise_frac = " + format_double(cfg.sampling.systematic_noise_frac) +
         "\n";
    t += "recon.method = " + cfg.method + "\n";
    t += "recon.mu = " + format_double(cfg.tv.mu) + "\n";
    t += "recon.beta = " + format_double(cfg.tv.beta) + "\n";
    t += "recon.tol = " + format_double(cfg.tv.outer_tol) + "\n";
    t += "recon.max_outer = " + std::to_string(cfg.tv.max_outer) + "\n";
    t += "recon.inner_steps = " + std::to_string(cfg.tv.inner_steps) + "\n";
    t += "recon.nonneg = " + std::string(cfg.tv.nonneg ? "true" : "false") + "\n";
    t += "recon.preprocessing = " +
         std::string(cfg.preprocessing == Preprocessing::mean_centered ? "mean_centered"
                                                                       : "raw") +
         "\n";
    t += "metrics.roi_margin = " + std::to_string(cfg.roi_margin) + "\n";
    t += "metrics.frame = " + std::to_string(cfg.analysis_frame) + "\n";
    std::string formats;
    for (const auto& f : cfg.formats) {
        if (!formats.empty()) formats += ",";
        formats += f;
    }
    t += "output.formats = " + formats + "\n";
    std::vector<unsigned char> bytes(t.begin(), t.end());
    write_file_bytes(path, bytes);
}

}  // namespace spgi
