#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "slf/core.hpp"
#include "slf/filter.hpp"
#include "slf/gbt.hpp"
#include "slf/preprocess.hpp"
#include "slf/simkit.hpp"

namespace slf::io {

/// Shortest decimal form that parses back to the same double.
inline std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string fmt(std::int64_t v) {
    char buf[24];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw IoError("bad numeric field '" + std::string(s) + "' in " + context);
    return v;
}

inline std::int64_t parse_int(std::string_view s, const std::string& context) {
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw IoError("bad integer field '" + std::string(s) + "' in " + context);
    return v;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// -- dataset files ----------------------------------------------------------

inline std::string dataset_csv_string(const std::vector<simkit::TrackPair>& tracks) {
    std::string out = "track_id,k,zx,zy,true_px,true_vx,true_py,true_vy\n";
    for (const auto& tp : tracks) {
        for (std::size_t i = 0; i < tp.meas.size(); ++i) {
            const auto& z = tp.meas[i];
            const auto& x = tp.truth[i];
            out += fmt(static_cast<std::int64_t>(tp.track_id));
            out += ',';
            out += fmt(static_cast<std::int64_t>(z.k));
            out += ',';
            out += fmt(z.zx);
            out += ',';
            out += fmt(z.zy);
            out += ',';
            out += fmt(x.px);
            out += ',';
            out += fmt(x.vx);
            out += ',';
            out += fmt(x.py);
            out += ',';
            out += fmt(x.vy);
            out += '\n';
        }
    }
    return out;
}

inline void write_dataset_csv(const std::filesystem::path& path,
                              const std::vector<simkit::TrackPair>& tracks) {
    write_text_file(path, dataset_csv_string(tracks));
}

inline std::vector<simkit::TrackPair> read_dataset_csv(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::vector<simkit::TrackPair> tracks;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "track_id,k,zx,zy,true_px,true_vx,true_py,true_vy")
                throw IoError("unexpected dataset header in " + path.string());
            continue;
        }
        const auto f = split_fields(line);
        if (f.size() != 8)
            throw IoError("expected 8 fields at line " + std::to_string(line_no) +
                          " of " + path.string());
        const std::string ctx = path.string() + ":" + std::to_string(line_no);
        const int id = static_cast<int>(parse_int(f[0], ctx));
        if (tracks.empty() || tracks.back().track_id != id) {
            tracks.emplace_back();
            tracks.back().track_id = id;
        }
        simkit::Measurement z{parse_double(f[2], ctx), parse_double(f[3], ctx),
                              static_cast<int>(parse_int(f[1], ctx))};
        simkit::StateVector x{parse_double(f[4], ctx), parse_double(f[5], ctx),
                              parse_double(f[6], ctx), parse_double(f[7], ctx)};
        tracks.back().meas.push_back(z);
        tracks.back().truth.push_back(x);
    }
    return tracks;
}

// -- sample files -----------------------------------------------------------

inline void write_samples_csv(const std::filesystem::path& path,
                              const preprocess::Dataset& ds, int tau) {
    std::string out = "track_id,window_index,k,alpha";
    for (int i = 1; i <= 2 * (tau - 1); ++i) out += ",f_" + std::to_string(i);
    out += ",target_x,target_y\n";
    for (const auto& s : ds.samples) {
        out += fmt(static_cast<std::int64_t>(s.track_id));
        out += ',';
        out += fmt(static_cast<std::int64_t>(s.window_index));
        out += ',';
        out += fmt(static_cast<std::int64_t>(s.k));
        out += ',';
        out += fmt(s.alpha);
        for (double v : s.features) {
            out += ',';
            if (!is_missing(v)) out += fmt(v);
        }
        out += ',';
        out += fmt(s.target.x);
        out += ',';
        out += fmt(s.target.y);
        out += '\n';
    }
    write_text_file(path, out);
}

// -- estimate files ---------------------------------------------------------

inline void write_estimates_csv(const std::filesystem::path& path,
                                const std::vector<int>& track_ids,
                                const std::vector<std::vector<Vec2>>& estimates) {
    if (track_ids.size() != estimates.size())
        throw InvalidArgument("write_estimates_csv: id/estimate count mismatch");
    std::string out = "track_id,k,est_x,est_y\n";
    for (std::size_t t = 0; t < estimates.size(); ++t) {
        for (std::size_t i = 0; i < estimates[t].size(); ++i) {
            out += fmt(static_cast<std::int64_t>(track_ids[t]));
            out += ',';
            out += fmt(static_cast<std::int64_t>(i + 1));
            out += ',';
            out += fmt(estimates[t][i].x);
            out += ',';
            out += fmt(estimates[t][i].y);
            out += '\n';
        }
    }
    write_text_file(path, out);
}

inline std::vector<std::vector<Vec2>> read_estimates_csv(
    const std::filesystem::path& path, std::vector<int>* track_ids = nullptr) {
    const std::string text = read_text_file(path);
    std::vector<std::vector<Vec2>> out;
    if (track_ids) track_ids->clear();
    std::size_t pos = 0;
    int line_no = 0;
    int last_id = 0;
    bool have_track = false;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "track_id,k,est_x,est_y")
                throw IoError("unexpected estimates header in " + path.string());
            continue;
        }
        const auto f = split_fields(line);
        if (f.size() != 4)
            throw IoError("expected 4 fields at line " + std::to_string(line_no) +
                          " of " + path.string());
        const std::string ctx = path.string() + ":" + std::to_string(line_no);
        const int id = static_cast<int>(parse_int(f[0], ctx));
        if (!have_track || id != last_id) {
            out.emplace_back();
            if (track_ids) track_ids->push_back(id);
            last_id = id;
            have_track = true;
        }
        out.back().push_back({parse_double(f[2], ctx), parse_double(f[3], ctx)});
    }
    return out;
}

// -- result files -----------------------------------------------------------

/// Header `k,<label>,...`; one row per step starting at k = 1.
inline void write_results_csv(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::vector<double>>>& columns) {
    if (columns.empty()) throw InvalidArgument("write_results_csv: no columns");
    const std::size_t t_len = columns.front().second.size();
    std::string out = "k";
    for (const auto& [label, values] : columns) {
        if (values.size() != t_len)
            throw InvalidArgument("write_results_csv: ragged columns");
        out += ',';
        out += label;
    }
    out += '\n';
    for (std::size_t i = 0; i < t_len; ++i) {
        out += fmt(static_cast<std::int64_t>(i + 1));
        for (const auto& [label, values] : columns) {
            out += ',';
            out += fmt(values[i]);
        }
        out += '\n';
    }
    write_text_file(path, out);
}

inline std::vector<std::pair<std::string, std::vector<double>>> read_results_csv(
    const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::vector<std::pair<std::string, std::vector<double>>> columns;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (line_no == 1) {
            if (f.size() < 2 || f[0] != "k")
                throw IoError("unexpected results header in " + path.string());
            for (std::size_t i = 1; i < f.size(); ++i)
                columns.emplace_back(std::string(f[i]), std::vector<double>{});
            continue;
        }
        if (f.size() != columns.size() + 1)
            throw IoError("ragged row at line " + std::to_string(line_no) + " of " +
                          path.string());
        const std::string ctx = path.string() + ":" + std::to_string(line_no);
        for (std::size_t i = 1; i < f.size(); ++i)
            columns[i - 1].second.push_back(parse_double(f[i], ctx));
    }
    return columns;
}

// -- model bundles ----------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json tree_node_json(const gbt::Tree& tree, std::int32_t idx) {
    const gbt::TreeNode& n = tree.nodes[static_cast<std::size_t>(idx)];
    nlohmann::ordered_json j;
    if (n.is_leaf()) {
        j["weight"] = n.weight;
    } else {
        j["feature"] = n.feature;
        j["threshold"] = n.threshold;
        j["default_left"] = n.default_left;
        j["left"] = tree_node_json(tree, n.left);
        j["right"] = tree_node_json(tree, n.right);
    }
    return j;
}

inline std::int32_t tree_node_from_json(const nlohmann::ordered_json& j, gbt::Tree& tree) {
    const auto idx = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("weight")) {
        tree.nodes[static_cast<std::size_t>(idx)].weight = j.at("weight").get<double>();
    } else {
        const int feature = j.at("feature").get<int>();
        const double threshold = j.at("threshold").get<double>();
        const bool default_left = j.at("default_left").get<bool>();
        const std::int32_t left = tree_node_from_json(j.at("left"), tree);
        const std::int32_t right = tree_node_from_json(j.at("right"), tree);
        gbt::TreeNode& n = tree.nodes[static_cast<std::size_t>(idx)];
        n.feature = feature;
        n.threshold = threshold;
        n.default_left = default_left;
        n.left = left;
        n.right = right;
    }
    return idx;
}

}  // namespace detail

inline nlohmann::ordered_json model_to_json(const gbt::BoostedModel& model) {
    nlohmann::ordered_json j;
    j["eta"] = model.eta;
    j["base_score"] = model.base_score;
    j["n_features"] = model.n_features;
    j["trees"] = nlohmann::ordered_json::array();
    for (const auto& t : model.trees) j["trees"].push_back(detail::tree_node_json(t, 0));
    return j;
}

inline gbt::BoostedModel model_from_json(const nlohmann::ordered_json& j) {
    gbt::BoostedModel model;
    model.eta = j.at("eta").get<double>();
    model.base_score = j.at("base_score").get<double>();
    model.n_features = j.at("n_features").get<int>();
    for (const auto& tj : j.at("trees")) {
        gbt::Tree t;
        detail::tree_node_from_json(tj, t);
        model.trees.push_back(std::move(t));
    }
    return model;
}

inline nlohmann::ordered_json params_to_json(const gbt::TrainParams& p) {
    nlohmann::ordered_json j;
    j["nrounds"] = p.nrounds;
    j["max_depth"] = p.max_depth;
    j["eta"] = p.eta;
    j["lambda"] = p.lambda;
    j["gamma"] = p.gamma;
    j["min_samples_leaf"] = p.min_samples_leaf;
    j["base_score"] = p.base_score;
    return j;
}

inline gbt::TrainParams params_from_json(const nlohmann::ordered_json& j) {
    gbt::TrainParams p;
    p.nrounds = j.at("nrounds").get<int>();
    p.max_depth = j.at("max_depth").get<int>();
    p.eta = j.at("eta").get<double>();
    p.lambda = j.at("lambda").get<double>();
    p.gamma = j.at("gamma").get<double>();
    p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    p.base_score = j.at("base_score").get<double>();
    return p;
}

inline std::string fingerprint_hex(std::uint64_t fp) {
    char buf[17];
    for (int i = 15; i >= 0; --i) {
        buf[i] = "0123456789abcdef"[fp & 0xF];
        fp >>= 4;
    }
    buf[16] = '\0';
    return std::string(buf, 16);
}

/// Writes model_x.json, model_y.json, and manifest.json into `dir`.
inline void save_model_bundle(const std::filesystem::path& dir, const SlfModel& model,
                              std::uint64_t dataset_fingerprint) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "model_x.json", model_to_json(model.model_x).dump(1) + "\n");
    write_text_file(dir / "model_y.json", model_to_json(model.model_y).dump(1) + "\n");
    nlohmann::ordered_json m;
    m["tau"] = model.tau;
    m["rotation"] = model.rotation_enabled;
    m["train_params"] = params_to_json(model.train_params);
    m["training_rmse"] = model.training_rmse;
    m["skipped_windows"] = model.skipped_windows;
    m["n_features"] = 2 * (model.tau - 1);
    m["dataset_fingerprint"] = fingerprint_hex(dataset_fingerprint);
    write_text_file(dir / "manifest.json", m.dump(1) + "\n");
}

inline SlfModel load_model_bundle(const std::filesystem::path& dir,
                                  std::string* fingerprint_out = nullptr) {
    const auto manifest =
        nlohmann::ordered_json::parse(read_text_file(dir / "manifest.json"));
    SlfModel model;
    model.tau = manifest.at("tau").get<int>();
    model.rotation_enabled = manifest.at("rotation").get<bool>();
    model.train_params = params_from_json(manifest.at("train_params"));
    model.training_rmse = manifest.at("training_rmse").get<double>();
    model.skipped_windows = manifest.at("skipped_windows").get<int>();
    model.model_x = model_from_json(
        nlohmann::ordered_json::parse(read_text_file(dir / "model_x.json")));
    model.model_y = model_from_json(
        nlohmann::ordered_json::parse(read_text_file(dir / "model_y.json")));
    if (fingerprint_out)
        *fingerprint_out = manifest.at("dataset_fingerprint").get<std::string>();
    return model;
}

inline std::uint64_t dataset_fingerprint(const std::vector<simkit::TrackPair>& tracks) {
    const std::string csv = dataset_csv_string(tracks);
    return fnv1a64(csv.data(), csv.size());
}

}  // namespace slf::io
