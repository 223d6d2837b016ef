#include "utrack/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "utrack/error.hpp"
#include "utrack/io.hpp"

namespace utrack::config {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double to_double(std::string_view key, std::string_view v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
        throw Error("invalid number for '" + std::string(key) + "': '" + std::string(v) + "'");
    }
    return out;
}

long long to_int(std::string_view key, std::string_view v) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
        throw Error("invalid integer for '" + std::string(key) + "': '" + std::string(v) + "'");
    }
    return out;
}

bool to_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw Error("invalid boolean for '" + std::string(key) + "': '" + std::string(v) + "'");
}

// Field table shared by the text and JSON forms of TrackerConfig.
struct Field {
    enum Kind { Real, Integer, Flag } kind;
    std::function<void*(TrackerConfig&)> ref;
};

const std::vector<std::pair<std::string, Field>>& tracker_fields() {
    static const std::vector<std::pair<std::string, Field>> fields = {
        {"tau1", {Field::Real, [](TrackerConfig& c) -> void* { return &c.tau1; }}},
        {"tau2", {Field::Real, [](TrackerConfig& c) -> void* { return &c.tau2; }}},
        {"score_high", {Field::Real, [](TrackerConfig& c) -> void* { return &c.score_high; }}},
        {"score_low", {Field::Real, [](TrackerConfig& c) -> void* { return &c.score_low; }}},
        {"match_thr_1", {Field::Real, [](TrackerConfig& c) -> void* { return &c.match_thr_1; }}},
        {"match_thr_tentative", {Field::Real, [](TrackerConfig& c) -> void* { return &c.match_thr_tentative; }}},
        {"match_thr_2", {Field::Real, [](TrackerConfig& c) -> void* { return &c.match_thr_2; }}},
        {"match_thr_relax", {Field::Real, [](TrackerConfig& c) -> void* { return &c.match_thr_relax; }}},
        {"max_lost", {Field::Integer, [](TrackerConfig& c) -> void* { return &c.max_lost; }}},
        {"min_hits", {Field::Integer, [](TrackerConfig& c) -> void* { return &c.min_hits; }}},
        {"enable_kfcov", {Field::Flag, [](TrackerConfig& c) -> void* { return &c.enable_kfcov; }}},
        {"enable_ellipse", {Field::Flag, [](TrackerConfig& c) -> void* { return &c.enable_ellipse; }}},
        {"enable_relax", {Field::Flag, [](TrackerConfig& c) -> void* { return &c.enable_relax; }}},
        {"enable_greedy", {Field::Flag, [](TrackerConfig& c) -> void* { return &c.enable_greedy; }}},
        {"kfcov_init", {Field::Flag, [](TrackerConfig& c) -> void* { return &c.kfcov_init; }}},
        {"std_weight_position",
         {Field::Real, [](TrackerConfig& c) -> void* { return &c.noise.std_weight_position; }}},
        {"std_weight_velocity",
         {Field::Real, [](TrackerConfig& c) -> void* { return &c.noise.std_weight_velocity; }}},
    };
    return fields;
}

const Field* find_field(std::string_view key) {
    for (const auto& [name, f] : tracker_fields())
        if (name == key) return &f;
    return nullptr;
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::string_view text) {
    std::vector<KeyValue> out;
    std::size_t number = 0;
    while (!text.empty()) {
        ++number;
        const auto nl = text.find('\n');
        std::string_view line = nl == std::string_view::npos ? text : text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", number);
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ParseError("empty key", number);
        out.push_back({std::string(key), std::string(trim(line.substr(eq + 1))), number});
    }
    return out;
}

void apply(TrackerConfig& cfg, std::string_view key, std::string_view value) {
    const Field* f = find_field(key);
    if (f == nullptr) throw Error("unknown tracker setting '" + std::string(key) + "'");
    void* p = f->ref(cfg);
    switch (f->kind) {
        case Field::Real: *static_cast<double*>(p) = to_double(key, value); break;
        case Field::Integer: *static_cast<int*>(p) = static_cast<int>(to_int(key, value)); break;
        case Field::Flag: *static_cast<bool*>(p) = to_bool(key, value); break;
    }
}

TrackerConfig tracker_config_from_text(std::string_view text, TrackerConfig base) {
    for (const auto& kv : parse_key_values(text)) {
        try {
            apply(base, kv.key, kv.value);
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(e.what(), kv.line);
        }
    }
    base.validate();
    return base;
}

TrackerConfig load_tracker_config(const std::filesystem::path& path, TrackerConfig base) {
    return tracker_config_from_text(io::read_file(path), base);
}

std::string format_tracker_config(const TrackerConfig& cfg) {
    TrackerConfig copy = cfg;
    std::string out;
    for (const auto& [name, f] : tracker_fields()) {
        void* p = f.ref(copy);
        out += name + " = ";
        switch (f.kind) {
            case Field::Real: out += io::format_double(*static_cast<double*>(p)); break;
            case Field::Integer: out += std::to_string(*static_cast<int*>(p)); break;
            case Field::Flag: out += *static_cast<bool*>(p) ? "true" : "false"; break;
        }
        out += "\n";
    }
    return out;
}

nlohmann::json to_json(const TrackerConfig& cfg) {
    TrackerConfig copy = cfg;
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, f] : tracker_fields()) {
        void* p = f.ref(copy);
        switch (f.kind) {
            case Field::Real: j[name] = *static_cast<double*>(p); break;
            case Field::Integer: j[name] = *static_cast<int*>(p); break;
            case Field::Flag: j[name] = *static_cast<bool*>(p); break;
        }
    }
    return j;
}

TrackerConfig tracker_config_from_json(const nlohmann::json& j) {
    TrackerConfig cfg;
    for (const auto& [key, value] : j.items()) {
        const Field* f = find_field(key);
        if (f == nullptr) throw Error("unknown tracker setting '" + key + "'");
        void* p = f->ref(cfg);
        switch (f->kind) {
            case Field::Real: *static_cast<double*>(p) = value.get<double>(); break;
            case Field::Integer: *static_cast<int*>(p) = value.get<int>(); break;
            case Field::Flag: *static_cast<bool*>(p) = value.get<bool>(); break;
        }
    }
    cfg.validate();
    return cfg;
}

// ---- scenarios ----

void apply(ScenarioSpec& s, std::string_view key, std::string_view value) {
    static const std::map<std::string, double ScenarioSpec::*, std::less<>> reals = {
        {"image_w", &ScenarioSpec::image_w},
        {"image_h", &ScenarioSpec::image_h},
        {"min_height", &ScenarioSpec::min_height},
        {"max_height", &ScenarioSpec::max_height},
        {"max_speed", &ScenarioSpec::max_speed},
        {"sigma_px", &ScenarioSpec::sigma_px},
        {"sigma_rel", &ScenarioSpec::sigma_rel},
        {"occlusion_factor", &ScenarioSpec::occlusion_factor},
        {"occlusion_overlap", &ScenarioSpec::occlusion_overlap},
        {"small_height", &ScenarioSpec::small_height},
        {"small_factor", &ScenarioSpec::small_factor},
        {"miscalibration", &ScenarioSpec::miscalibration},
        {"dropout", &ScenarioSpec::dropout},
        {"clutter_rate", &ScenarioSpec::clutter_rate},
        {"clutter_sigma", &ScenarioSpec::clutter_sigma},
        {"score_visible_min", &ScenarioSpec::score_visible_min},
        {"score_visible_max", &ScenarioSpec::score_visible_max},
        {"score_occluded_min", &ScenarioSpec::score_occluded_min},
        {"score_occluded_max", &ScenarioSpec::score_occluded_max},
    };
    if (auto it = reals.find(key); it != reals.end()) {
        s.*(it->second) = to_double(key, value);
    } else if (key == "name") {
        s.name = std::string(value);
    } else if (key == "n_objects") {
        s.n_objects = static_cast<int>(to_int(key, value));
    } else if (key == "frame_count") {
        s.frame_count = static_cast<int>(to_int(key, value));
    } else if (key == "n_labels") {
        s.n_labels = static_cast<int>(to_int(key, value));
    } else if (key == "seed") {
        const auto v = to_int(key, value);
        if (v < 0) throw Error("seed must be non-negative");
        s.seed = static_cast<std::uint64_t>(v);
    } else if (key == "object") {
        std::vector<std::string_view> parts;
        std::string_view rest = value;
        while (true) {
            const auto comma = rest.find(',');
            parts.push_back(trim(rest.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (parts.size() != 7) throw Error("object needs x,y,w,h,vx,vy,label");
        ObjectSpec o{to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2]),
                     to_double(key, parts[3]), to_double(key, parts[4]), to_double(key, parts[5]),
                     static_cast<int>(to_int(key, parts[6]))};
        s.objects.push_back(o);
        s.n_objects = static_cast<int>(s.objects.size());
    } else {
        throw Error("unknown scenario setting '" + std::string(key) + "'");
    }
}

ScenarioSpec scenario_from_text(std::string_view text, ScenarioSpec base) {
    for (const auto& kv : parse_key_values(text)) {
        try {
            apply(base, kv.key, kv.value);
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(e.what(), kv.line);
        }
    }
    base.validate();
    return base;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) { return scenario_from_text(io::read_file(path)); }

nlohmann::json to_json(const ScenarioSpec& s) {
    nlohmann::json objs = nlohmann::json::array();
    for (const auto& o : s.objects) objs.push_back({o.x, o.y, o.w, o.h, o.vx, o.vy, o.label});
    return {
        {"name", s.name},
        {"n_objects", s.n_objects},
        {"frame_count", s.frame_count},
        {"image_w", s.image_w},
        {"image_h", s.image_h},
        {"objects", objs},
        {"min_height", s.min_height},
        {"max_height", s.max_height},
        {"max_speed", s.max_speed},
        {"n_labels", s.n_labels},
        {"sigma_px", s.sigma_px},
        {"sigma_rel", s.sigma_rel},
        {"occlusion_factor", s.occlusion_factor},
        {"occlusion_overlap", s.occlusion_overlap},
        {"small_height", s.small_height},
        {"small_factor", s.small_factor},
        {"miscalibration", s.miscalibration},
        {"dropout", s.dropout},
        {"clutter_rate", s.clutter_rate},
        {"clutter_sigma", s.clutter_sigma},
        {"score_visible_min", s.score_visible_min},
        {"score_visible_max", s.score_visible_max},
        {"score_occluded_min", s.score_occluded_min},
        {"score_occluded_max", s.score_occluded_max},
        {"seed", s.seed},
    };
}

ScenarioSpec scenario_from_json(const nlohmann::json& j) {
    ScenarioSpec s;
    s.name = j.at("name").get<std::string>();
    s.n_objects = j.at("n_objects").get<int>();
    s.frame_count = j.at("frame_count").get<int>();
    s.image_w = j.at("image_w").get<double>();
    s.image_h = j.at("image_h").get<double>();
    for (const auto& o : j.at("objects")) {
        s.objects.push_back({o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>(),
                             o.at(3).get<double>(), o.at(4).get<double>(), o.at(5).get<double>(), o.at(6).get<int>()});
    }
    s.min_height = j.at("min_height").get<double>();
    s.max_height = j.at("max_height").get<double>();
    s.max_speed = j.at("max_speed").get<double>();
    s.n_labels = j.at("n_labels").get<int>();
    s.sigma_px = j.at("sigma_px").get<double>();
    s.sigma_rel = j.at("sigma_rel").get<double>();
    s.occlusion_factor = j.at("occlusion_factor").get<double>();
    s.occlusion_overlap = j.at("occlusion_overlap").get<double>();
    s.small_height = j.at("small_height").get<double>();
    s.small_factor = j.at("small_factor").get<double>();
    s.miscalibration = j.at("miscalibration").get<double>();
    s.dropout = j.at("dropout").get<double>();
    s.clutter_rate = j.at("clutter_rate").get<double>();
    s.clutter_sigma = j.at("clutter_sigma").get<double>();
    s.score_visible_min = j.at("score_visible_min").get<double>();
    s.score_visible_max = j.at("score_visible_max").get<double>();
    s.score_occluded_min = j.at("score_occluded_min").get<double>();
    s.score_occluded_max = j.at("score_occluded_max").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.validate();
    return s;
}

nlohmann::json to_json(const ScoreReport& r) {
    return {{"nll", r.nll}, {"es", r.es}, {"sample_iou", r.sample_iou}, {"n_pairs", r.n_pairs},
            {"m_samples", r.m_samples}};
}

namespace {

nlohmann::json class_json(const motmetrics::ClassMetrics& m) {
    return {{"mota", m.mota},          {"idf1", m.idf1},        {"fp", m.tally.fp},     {"fn", m.tally.fn},
            {"ids", m.tally.ids},      {"matches", m.tally.matches}, {"gt_count", m.tally.gt_count},
            {"idtp", m.id.idtp},       {"idfp", m.id.idfp},     {"idfn", m.id.idfn}};
}

}  // namespace

nlohmann::json to_json(const motmetrics::EvalReport& r) {
    nlohmann::json per_class = nlohmann::json::object();
    for (const auto& [label, m] : r.per_class) per_class[std::to_string(label)] = class_json(m);
    return {{"mMOTA", r.mmota}, {"mIDF1", r.midf1}, {"overall", class_json(r.overall)}, {"per_class", per_class}};
}

}  // namespace utrack::config
