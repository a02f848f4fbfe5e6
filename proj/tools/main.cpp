#include <array>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gsvq/codec.hpp"
#include "gsvq/compressor.hpp"
#include "gsvq/errors.hpp"
#include "gsvq/metrics.hpp"
#include "gsvq/parallel.hpp"
#include "gsvq/ply.hpp"
#include "gsvq/renderer.hpp"
#include "gsvq/synth.hpp"

namespace {

using nlohmann::json;

constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitFormat = 3;
constexpr int kExitNumeric = 4;

// Optional overrides collected from flags; applied on top of defaults and the
// config file so explicit flags always win.
struct ConfigFlags {
    std::optional<std::string> size_name;
    std::optional<std::string> config_path;
    std::optional<std::uint32_t> entries_s, entries_r, entries_c, entries_sh;
    std::optional<double> prune_lambda, prune_threshold;
    std::optional<int> prune_steps, vq_steps, finetune_steps, replace_period, kmeans_iters;
    std::optional<double> lr_codebook, lr_attr, lr_render;
    std::optional<std::size_t> batch_size;
    std::optional<std::uint64_t> seed, replace_threshold;
    bool render_loss = false;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
    cmd->add_option("--size", f.size_name,
                    "named codebook size (16k, 8k, 4k, 2k, 1k, 0.5k); scaling/rotation entries, "
                    "colour/SH at one quarter");
    cmd->add_option("--config", f.config_path, "JSON config file (flags override it)");
    cmd->add_option("--entries-s", f.entries_s, "scaling codebook entries (power of two)");
    cmd->add_option("--entries-r", f.entries_r, "rotation codebook entries");
    cmd->add_option("--entries-c", f.entries_c, "colour codebook entries");
    cmd->add_option("--entries-sh", f.entries_sh, "SH codebook entries");
    cmd->add_option("--prune-lambda", f.prune_lambda, "opacity regularization weight");
    cmd->add_option("--prune-threshold", f.prune_threshold, "activated-opacity removal cutoff");
    cmd->add_option("--prune-steps", f.prune_steps, "pruning gradient steps");
    cmd->add_option("--vq-steps", f.vq_steps, "VQ training steps");
    cmd->add_option("--finetune-steps", f.finetune_steps, "fine-tune polish steps");
    cmd->add_option("--lr-codebook", f.lr_codebook, "codebook learning rate");
    cmd->add_option("--lr-attr", f.lr_attr, "pruning step size");
    cmd->add_option("--lr-render", f.lr_render, "render-loss learning rate");
    cmd->add_option("--batch", f.batch_size, "splats per optimizer step");
    cmd->add_option("--replace-period", f.replace_period, "codebook replacement period (steps)");
    cmd->add_option("--replace-threshold", f.replace_threshold, "usage threshold for replacement");
    cmd->add_option("--kmeans-iters", f.kmeans_iters, "k-means iterations for initialization");
    cmd->add_option("--seed", f.seed, "RNG seed");
    cmd->add_flag("--render-loss", f.render_loss,
                  "train colour/SH codebooks through the render loss (needs --cameras)");
}

void load_config_file(gsvq::CompressionConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw gsvq::IoError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw gsvq::FormatError(gsvq::FormatError::Kind::BadValue, 0,
                                "config file '" + path + "' is not valid JSON: " + e.what());
    }
    try {
        if (j.contains("size")) gsvq::apply_size_name(cfg, j["size"].get<std::string>());
        cfg.entries_s = j.value("entries_s", cfg.entries_s);
        cfg.entries_r = j.value("entries_r", cfg.entries_r);
        cfg.entries_c = j.value("entries_c", cfg.entries_c);
        cfg.entries_sh = j.value("entries_sh", cfg.entries_sh);
        cfg.prune_lambda = j.value("prune_lambda", cfg.prune_lambda);
        cfg.prune_threshold = j.value("prune_threshold", cfg.prune_threshold);
        cfg.prune_steps = j.value("prune_steps", cfg.prune_steps);
        cfg.vq_steps = j.value("vq_steps", cfg.vq_steps);
        cfg.finetune_steps = j.value("finetune_steps", cfg.finetune_steps);
        cfg.lr_codebook = j.value("lr_codebook", cfg.lr_codebook);
        cfg.lr_attr = j.value("lr_attr", cfg.lr_attr);
        cfg.lr_render = j.value("lr_render", cfg.lr_render);
        cfg.batch_size = j.value("batch_size", cfg.batch_size);
        cfg.replace_period = j.value("replace_period", cfg.replace_period);
        cfg.replace_threshold = j.value("replace_threshold", cfg.replace_threshold);
        cfg.replace_jitter = j.value("replace_jitter", cfg.replace_jitter);
        cfg.kmeans_iters = j.value("kmeans_iters", cfg.kmeans_iters);
        cfg.kmeans_tol = j.value("kmeans_tol", cfg.kmeans_tol);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.render_loss = j.value("render_loss", cfg.render_loss);
    } catch (const json::exception& e) {
        throw gsvq::FormatError(gsvq::FormatError::Kind::BadValue, 0,
                                "config file '" + path + "' field error: " + e.what());
    }
}

gsvq::CompressionConfig build_config(const ConfigFlags& f) {
    gsvq::CompressionConfig cfg;
    if (f.config_path) load_config_file(cfg, *f.config_path);
    if (f.size_name) gsvq::apply_size_name(cfg, *f.size_name);
    if (f.entries_s) cfg.entries_s = *f.entries_s;
    if (f.entries_r) cfg.entries_r = *f.entries_r;
    if (f.entries_c) cfg.entries_c = *f.entries_c;
    if (f.entries_sh) cfg.entries_sh = *f.entries_sh;
    if (f.prune_lambda) cfg.prune_lambda = *f.prune_lambda;
    if (f.prune_threshold) cfg.prune_threshold = *f.prune_threshold;
    if (f.prune_steps) cfg.prune_steps = *f.prune_steps;
    if (f.vq_steps) cfg.vq_steps = *f.vq_steps;
    if (f.finetune_steps) cfg.finetune_steps = *f.finetune_steps;
    if (f.lr_codebook) cfg.lr_codebook = *f.lr_codebook;
    if (f.lr_attr) cfg.lr_attr = *f.lr_attr;
    if (f.lr_render) cfg.lr_render = *f.lr_render;
    if (f.batch_size) cfg.batch_size = *f.batch_size;
    if (f.replace_period) cfg.replace_period = *f.replace_period;
    if (f.replace_threshold) cfg.replace_threshold = *f.replace_threshold;
    if (f.kmeans_iters) cfg.kmeans_iters = *f.kmeans_iters;
    if (f.seed) cfg.seed = *f.seed;
    if (f.render_loss) cfg.render_loss = true;
    cfg.validate();
    return cfg;
}

std::array<double, 3> parse_background(const std::string& s) {
    std::array<double, 3> bg{};
    std::stringstream ss(s);
    std::string item;
    int i = 0;
    while (std::getline(ss, item, ',') && i < 3) bg[i++] = std::stod(item);
    if (i != 3) throw std::invalid_argument("--background expects r,g,b");
    return bg;
}

json sizes_to_json(const gsvq::SizeReport& s) {
    json j;
    j["header_bytes"] = s.header_bytes;
    j["codebook_bytes"] = s.codebook_bytes;
    j["raw_bytes"] = s.raw_bytes;
    for (int g = 0; g < 4; ++g) {
        j["stream_bytes"][gsvq::kGroupNames[g]] = s.stream_bytes[g];
    }
    j["total_bytes"] = s.total_bytes;
    j["uncompressed_bytes"] = s.uncompressed_bytes;
    j["ratio"] = s.ratio;
    return j;
}

json group_array(const std::array<double, 4>& v) {
    json j;
    for (int g = 0; g < 4; ++g) j[gsvq::kGroupNames[g]] = v[g];
    return j;
}

json report_to_json(const gsvq::CompressionReport& r) {
    json j;
    j["input_splats"] = r.input_splats;
    j["pruned_splats"] = r.pruned_splats;
    j["removed_splats"] = r.removed_splats;
    j["mse_init"] = group_array(r.mse_init);
    j["mse_trained"] = group_array(r.mse_trained);
    j["mse_final"] = group_array(r.mse_final);
    j["codebook_active_fraction"] = group_array(r.active_fraction);
    for (int g = 0; g < 4; ++g) {
        j["replaced_entries"][gsvq::kGroupNames[g]] = r.replaced_entries[g];
    }
    if (!r.render_loss_trace.empty()) {
        j["render_loss_first"] = r.render_loss_trace.front();
        j["render_loss_last"] = r.render_loss_trace.back();
    }
    return j;
}

json eval_to_json(const gsvq::EvalReport& r) {
    json j;
    if (r.has_psnr) {
        if (r.psnr_infinite) {
            j["psnr_db"] = nullptr;
            j["psnr_infinite"] = true;
        } else {
            j["psnr_db"] = r.psnr_db;
            j["psnr_infinite"] = false;
        }
    }
    j["attribute_mse"] = group_array(r.attr_mse);
    j["compressed_bytes"] = r.compressed_bytes;
    j["uncompressed_bytes"] = r.uncompressed_bytes;
    j["ratio"] = r.ratio;
    j["codebook_active_fraction"] = group_array(r.codebook_active_fraction);
    return j;
}

bool is_nvqg_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw gsvq::IoError("cannot open '" + path + "' for reading");
    char magic[4] = {};
    in.read(magic, 4);
    return in.gcount() == 4 && magic[0] == 'N' && magic[1] == 'V' && magic[2] == 'Q' &&
           magic[3] == 'G';
}

gsvq::SplatCloud load_cloud_any(const std::string& path) {
    if (is_nvqg_file(path)) return gsvq::dequantize(gsvq::decode(path));
    return gsvq::load_ply(path);
}

std::string indexed_path(const std::string& path, std::size_t index, std::size_t count) {
    if (count <= 1) return path;
    const std::size_t dot = path.rfind('.');
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "_%03zu", index);
    if (dot == std::string::npos) return path + suffix;
    return path.substr(0, dot) + suffix + path.substr(dot);
}

std::string csv_header() {
    return "size,entries_s,entries_r,entries_c,entries_sh,seed,psnr_db,mse_scale,mse_rotation,"
           "mse_color,mse_sh,compressed_bytes,uncompressed_bytes,ratio,active_scale,"
           "active_rotation,active_color,active_sh";
}

std::string csv_row(const std::string& size_name, const gsvq::CompressionConfig& cfg,
                    const gsvq::EvalReport& r) {
    std::ostringstream out;
    out << size_name << ',' << cfg.entries_s << ',' << cfg.entries_r << ',' << cfg.entries_c
        << ',' << cfg.entries_sh << ',' << cfg.seed << ',';
    if (r.has_psnr && !r.psnr_infinite) {
        out << r.psnr_db;
    } else if (r.psnr_infinite) {
        out << "inf";
    }
    for (int g = 0; g < 4; ++g) out << ',' << r.attr_mse[g];
    out << ',' << r.compressed_bytes << ',' << r.uncompressed_bytes << ',' << r.ratio;
    for (int g = 0; g < 4; ++g) out << ',' << r.codebook_active_fraction[g];
    return out.str();
}

// ---------------------------------------------------------------------------

int cmd_compress(const std::string& in, const std::string& out, const ConfigFlags& flags,
                 const std::string& cameras_path) {
    const gsvq::CompressionConfig cfg = build_config(flags);
    const gsvq::SplatCloud cloud = gsvq::load_ply(in);
    std::cerr << "[gsvq] loaded " << cloud.size() << " splats from " << in << "\n";

    std::vector<gsvq::Camera> cams;
    if (!cameras_path.empty()) cams = gsvq::load_cameras(cameras_path);

    gsvq::CompressionReport report;
    const gsvq::QuantizedCloud qc =
        gsvq::compress(cloud, cfg, cams.empty() ? nullptr : &cams, &report);
    const std::uint64_t written = gsvq::encode(qc, out);
    std::cerr << "[gsvq] wrote " << written << " bytes to " << out << "\n";

    json j = report_to_json(report);
    j["sizes"] = sizes_to_json(gsvq::size_report(qc));
    j["bytes_written"] = written;
    j["output"] = out;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_decompress(const std::string& in, const std::string& out) {
    const gsvq::QuantizedCloud qc = gsvq::decode(in);
    const gsvq::SplatCloud cloud = gsvq::dequantize(qc);
    gsvq::save_ply(cloud, out);
    std::cerr << "[gsvq] wrote " << cloud.size() << " splats to " << out << "\n";
    json j;
    j["splats"] = cloud.size();
    j["output"] = out;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_render(const std::string& in, const std::string& cameras_path, const std::string& out,
               const std::string& background, bool raw, int orbit, double radius, int width,
               int height) {
    const gsvq::SplatCloud cloud = load_cloud_any(in);
    std::vector<gsvq::Camera> cams;
    if (!cameras_path.empty()) {
        cams = gsvq::load_cameras(cameras_path);
    } else {
        cams = gsvq::generate_orbit_cameras(orbit, radius, width, height);
    }
    const std::array<double, 3> bg = parse_background(background);

    json outputs = json::array();
    for (std::size_t i = 0; i < cams.size(); ++i) {
        gsvq::RenderStats stats;
        const gsvq::Image img = gsvq::render(cloud, cams[i], bg, &stats);
        const std::string path = indexed_path(out, i, cams.size());
        if (raw || path.ends_with(".f32")) {
            gsvq::write_raw_f32(img, path);
        } else {
            gsvq::write_png(img, path);
        }
        std::cerr << "[gsvq] rendered " << path << " (" << img.width << "x" << img.height
                  << ", culled " << stats.culled << ")\n";
        outputs.push_back(path);
    }
    json j;
    j["outputs"] = outputs;
    j["splats"] = cloud.size();
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_eval(const std::string& in, const std::string& compressed,
             const std::string& cameras_path, const std::vector<std::string>& sizes, bool csv,
             const ConfigFlags& flags, const std::string& background) {
    const gsvq::SplatCloud original = gsvq::load_ply(in);
    std::vector<gsvq::Camera> cams;
    if (!cameras_path.empty()) cams = gsvq::load_cameras(cameras_path);
    const std::array<double, 3> bg = parse_background(background);

    if (!sizes.empty()) {
        // Sweep mode: compress at each named size, evaluate, one CSV row each.
        if (csv) std::cout << csv_header() << "\n";
        json rows = json::array();
        for (const std::string& size_name : sizes) {
            ConfigFlags f = flags;
            f.size_name = size_name;
            const gsvq::CompressionConfig cfg = build_config(f);
            const gsvq::QuantizedCloud qc =
                gsvq::compress(original, cfg, cams.empty() ? nullptr : &cams, nullptr);
            const gsvq::EvalReport rep = gsvq::evaluate(original, qc, cams, bg);
            if (csv) {
                std::cout << csv_row(size_name, cfg, rep) << "\n";
            } else {
                json j = eval_to_json(rep);
                j["size"] = size_name;
                rows.push_back(j);
            }
            std::cerr << "[gsvq] evaluated size " << size_name << "\n";
        }
        if (!csv) std::cout << rows.dump(2) << "\n";
        return 0;
    }

    if (compressed.empty()) {
        throw std::invalid_argument("eval needs --compressed FILE or --sizes LIST");
    }
    const gsvq::QuantizedCloud qc = gsvq::decode(compressed);
    const gsvq::EvalReport rep = gsvq::evaluate(original, qc, cams, bg);
    if (csv) {
        std::cout << csv_header() << "\n";
        gsvq::CompressionConfig cfg;
        cfg.entries_s = qc.cb_s.entries;
        cfg.entries_r = qc.cb_r.entries;
        cfg.entries_c = qc.cb_c.entries;
        cfg.entries_sh = qc.cb_sh.entries;
        std::cout << csv_row("-", cfg, rep) << "\n";
    } else {
        std::cout << eval_to_json(rep).dump(2) << "\n";
    }
    return 0;
}

int cmd_synth(std::size_t count, std::uint64_t seed, const std::string& preset, double extent,
              const std::string& out, const std::string& cameras_out, int cam_count,
              double radius, int width, int height) {
    gsvq::SceneSpec spec;
    spec.splat_count = count;
    spec.seed = seed;
    spec.extent = extent;
    if (preset == "grid") {
        spec.preset = gsvq::SceneSpec::Preset::Grid;
    } else if (preset == "random") {
        spec.preset = gsvq::SceneSpec::Preset::Random;
    } else {
        throw std::invalid_argument("unknown preset '" + preset + "' (random|grid)");
    }
    const gsvq::SplatCloud cloud = gsvq::generate_cloud(spec);
    json j;
    if (!out.empty()) {
        gsvq::save_ply(cloud, out);
        std::cerr << "[gsvq] wrote " << cloud.size() << " splats to " << out << "\n";
        j["output"] = out;
    }
    if (!cameras_out.empty()) {
        const auto cams = gsvq::generate_orbit_cameras(cam_count, radius, width, height);
        gsvq::save_cameras(cams, cameras_out);
        std::cerr << "[gsvq] wrote " << cams.size() << " cameras to " << cameras_out << "\n";
        j["cameras"] = cameras_out;
    }
    j["splats"] = cloud.size();
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_inspect(const std::string& in) {
    json j;
    if (is_nvqg_file(in)) {
        const gsvq::QuantizedCloud qc = gsvq::decode(in);
        j["format"] = "nvqg";
        j["splats"] = qc.size();
        for (int g = 0; g < 4; ++g) {
            const gsvq::Codebook& cb = qc.codebook(static_cast<gsvq::AttrGroup>(g));
            j["codebooks"][gsvq::kGroupNames[g]] = {
                {"entries", cb.entries},
                {"dim", cb.dim},
                {"bits", gsvq::bits_for_entries(cb.entries)},
            };
        }
        j["sizes"] = sizes_to_json(gsvq::size_report(qc));
    } else {
        const gsvq::SplatCloud cloud = gsvq::load_ply(in);
        j["format"] = "ply";
        j["splats"] = cloud.size();
        j["sh_degree"] = cloud.sh_degree;
        j["payload_bytes"] = cloud.size() * gsvq::kPlyVertexBytes;
        if (!cloud.empty()) {
            std::array<double, 3> lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
            double omin = 1.0, omax = 0.0;
            for (const auto& s : cloud.splats) {
                for (int c = 0; c < 3; ++c) {
                    lo[c] = std::min(lo[c], static_cast<double>(s.position[c]));
                    hi[c] = std::max(hi[c], static_cast<double>(s.position[c]));
                }
                const double o = gsvq::sigmoid(s.opacity_raw);
                omin = std::min(omin, o);
                omax = std::max(omax, o);
            }
            j["bbox_min"] = lo;
            j["bbox_max"] = hi;
            j["opacity_min"] = omin;
            j["opacity_max"] = omax;
        }
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gsvq: codebook compression toolkit for 3D Gaussian splat models"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads,
                   "thread cap (default: GSVQ_THREADS or hardware); never changes outputs");

    // compress
    auto* compress = app.add_subcommand("compress", "compress a PLY splat model to .nvqg");
    std::string c_in, c_out, c_cams;
    ConfigFlags c_flags;
    compress->add_option("--in", c_in, "input PLY")->required();
    compress->add_option("--out", c_out, "output .nvqg")->required();
    compress->add_option("--cameras", c_cams, "camera JSON (required for --render-loss)");
    add_config_flags(compress, c_flags);

    // decompress
    auto* decompress = app.add_subcommand("decompress", "expand a .nvqg back to a viewer PLY");
    std::string d_in, d_out;
    decompress->add_option("--in", d_in, "input .nvqg")->required();
    decompress->add_option("--out", d_out, "output PLY")->required();

    // render
    auto* render = app.add_subcommand("render", "render a PLY or .nvqg with the CPU renderer");
    std::string r_in, r_cams, r_out, r_bg = "0,0,0";
    bool r_raw = false;
    int r_orbit = 1, r_width = 256, r_height = 256;
    double r_radius = 2.5;
    render->add_option("--in", r_in, "input PLY or .nvqg")->required();
    render->add_option("--out", r_out, "output PNG (or .f32) path")->required();
    render->add_option("--cameras", r_cams, "camera JSON file");
    render->add_option("--background", r_bg, "background colour r,g,b");
    render->add_flag("--raw", r_raw, "write raw float32 instead of PNG");
    render->add_option("--orbit", r_orbit, "orbit camera count when no --cameras given");
    render->add_option("--radius", r_radius, "orbit radius");
    render->add_option("--width", r_width, "orbit image width");
    render->add_option("--height", r_height, "orbit image height");

    // eval
    auto* eval = app.add_subcommand("eval", "fidelity and size metrics");
    std::string e_in, e_compressed, e_cams, e_bg = "0,0,0";
    std::vector<std::string> e_sizes;
    bool e_csv = false;
    ConfigFlags e_flags;
    eval->add_option("--in", e_in, "original PLY")->required();
    eval->add_option("--compressed", e_compressed, "compressed .nvqg to evaluate");
    eval->add_option("--cameras", e_cams, "camera JSON for PSNR");
    eval->add_option("--sizes", e_sizes, "sweep: compress+evaluate at each named size")
        ->delimiter(',');
    eval->add_flag("--csv", e_csv, "emit CSV rows instead of JSON");
    eval->add_option("--background", e_bg, "background colour r,g,b");
    add_config_flags(eval, e_flags);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic scene and cameras");
    std::size_t s_count = 1000;
    std::uint64_t s_seed = 0;
    std::string s_preset = "random", s_out, s_cams_out;
    double s_extent = 1.0, s_radius = 2.5;
    int s_cam_count = 4, s_width = 256, s_height = 256;
    synth->add_option("--count", s_count, "splat count");
    synth->add_option("--seed", s_seed, "RNG seed");
    synth->add_option("--preset", s_preset, "random|grid");
    synth->add_option("--extent", s_extent, "scene box edge length");
    synth->add_option("--out", s_out, "output PLY");
    synth->add_option("--cameras-out", s_cams_out, "write orbit cameras JSON");
    synth->add_option("--cam-count", s_cam_count, "orbit camera count");
    synth->add_option("--radius", s_radius, "orbit radius");
    synth->add_option("--width", s_width, "camera image width");
    synth->add_option("--height", s_height, "camera image height");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "summarize a PLY or .nvqg file");
    std::string i_in;
    inspect->add_option("--in", i_in, "input file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    if (threads > 0) gsvq::set_max_threads(threads);

    try {
        if (compress->parsed()) return cmd_compress(c_in, c_out, c_flags, c_cams);
        if (decompress->parsed()) return cmd_decompress(d_in, d_out);
        if (render->parsed()) {
            return cmd_render(r_in, r_cams, r_out, r_bg, r_raw, r_orbit, r_radius, r_width,
                              r_height);
        }
        if (eval->parsed()) {
            return cmd_eval(e_in, e_compressed, e_cams, e_sizes, e_csv, e_flags, e_bg);
        }
        if (synth->parsed()) {
            return cmd_synth(s_count, s_seed, s_preset, s_extent, s_out, s_cams_out, s_cam_count,
                             s_radius, s_width, s_height);
        }
        if (inspect->parsed()) return cmd_inspect(i_in);
    } catch (const gsvq::IoError& e) {
        std::cerr << "[gsvq] i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const gsvq::FormatError& e) {
        std::cerr << "[gsvq] format error: " << e.what() << "\n";
        return kExitFormat;
    } catch (const gsvq::NumericError& e) {
        std::cerr << "[gsvq] numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "[gsvq] error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "[gsvq] error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
