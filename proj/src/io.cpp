#include "utrack/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include <Eigen/Eigenvalues>

#include "utrack/error.hpp"

namespace utrack::io {

namespace {

// Guards against absurd frame numbers allocating millions of empty frames.
constexpr long kMaxFrame = 10'000'000;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

struct Line {
    std::size_t number;
    std::string_view text;
};

std::vector<Line> content_lines(std::string_view text) {
    std::vector<Line> lines;
    std::size_t number = 0;
    while (!text.empty()) {
        ++number;
        const auto nl = text.find('\n');
        std::string_view line = nl == std::string_view::npos ? text : text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        line = trim(line);
        if (line.empty()) continue;
        lines.push_back({number, line});
    }
    return lines;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    while (true) {
        const auto pos = s.find(sep);
        out.push_back(trim(s.substr(0, pos)));
        if (pos == std::string_view::npos) break;
        s.remove_prefix(pos + 1);
    }
    return out;
}

double parse_double(std::string_view s, std::size_t line, const char* what) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || s.empty()) {
        throw ParseError(std::string("invalid ") + what + " '" + std::string(s) + "'", line);
    }
    if (!std::isfinite(v)) throw ParseError(std::string("non-finite ") + what, line);
    return v;
}

long parse_int(std::string_view s, std::size_t line, const char* what) {
    long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        // accept integral values written as decimals, e.g. "3.0"
        const double d = parse_double(s, line, what);
        if (d != std::floor(d) || std::abs(d) > 9e15) {
            throw ParseError(std::string("invalid ") + what + " '" + std::string(s) + "'", line);
        }
        return static_cast<long>(d);
    }
    return v;
}

int parse_frame(std::string_view s, std::size_t line) {
    const long f = parse_int(s, line, "frame");
    if (f < 1) throw ParseError("frame must be >= 1", line);
    if (f > kMaxFrame) throw ParseError("frame index too large", line);
    return static_cast<int>(f);
}

int parse_label(std::string_view s, std::size_t line) {
    const long l = parse_int(s, line, "label");
    if (l < INT32_MIN || l > INT32_MAX) throw ParseError("label out of range", line);
    return static_cast<int>(l);
}

Mat4 validated_cov(const Mat4& raw, std::size_t line) {
    Eigen::SelfAdjointEigenSolver<Mat4> es(raw);
    if (es.info() != Eigen::Success) throw ParseError("covariance eigen-decomposition failed", line);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig >= 0.0) return raw;
    if (min_eig < -kPsdTolerance) throw ParseError("covariance is not positive semi-definite", line);
    Mat4 clamped = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
    return 0.5 * (clamped + clamped.transpose());
}

std::size_t cov_count(CovArity a) {
    switch (a) {
        case CovArity::None: return 0;
        case CovArity::Diag4: return 4;
        case CovArity::Full10: return 10;
    }
    return 0;
}

// "key=value" pairs separated by commas or whitespace
std::map<std::string, std::string> header_fields(std::string_view s, std::size_t line) {
    std::map<std::string, std::string> out;
    std::string norm(s);
    std::replace(norm.begin(), norm.end(), ',', ' ');
    std::istringstream in(norm);
    std::string tok;
    while (in >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0) throw ParseError("malformed header field '" + tok + "'", line);
        out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

}  // namespace

const char* to_string(CovArity a) {
    switch (a) {
        case CovArity::None: return "none";
        case CovArity::Diag4: return "diag4";
        case CovArity::Full10: return "full10";
    }
    return "none";
}

CovArity parse_cov_arity(std::string_view s) {
    if (s == "none") return CovArity::None;
    if (s == "diag4") return CovArity::Diag4;
    if (s == "full10") return CovArity::Full10;
    throw Error("unknown covariance arity '" + std::string(s) + "'");
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw Error("number formatting failed");
    return std::string(buf, ptr);
}

std::string format_fixed3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    std::string s(buf);
    if (s == "-0.000") s = "0.000";
    return s;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) throw Error("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error("cannot move output into place at '" + path.string() + "'");
    }
}

// ---- detections ----

Sequence parse_detections(std::string_view text) {
    const auto lines = content_lines(text);
    std::size_t i = 0;
    while (i < lines.size() && lines[i].text.front() == '#') ++i;
    if (i == lines.size()) throw ParseError("missing cov=<none|diag4|full10> header", 1);

    const auto header = header_fields(lines[i].text, lines[i].number);
    auto cov_it = header.find("cov");
    if (cov_it == header.end()) throw ParseError("header must declare cov=<none|diag4|full10>", lines[i].number);
    CovArity arity{};
    try {
        arity = parse_cov_arity(cov_it->second);
    } catch (const Error& e) {
        throw ParseError(e.what(), lines[i].number);
    }
    int frame_count = 0;
    for (const auto& [k, v] : header) {
        if (k == "cov") continue;
        if (k != "frames") throw ParseError("unknown header field '" + k + "'", lines[i].number);
        const long n = parse_int(v, lines[i].number, "frame count");
        if (n < 0 || n > kMaxFrame) throw ParseError("frame count out of range", lines[i].number);
        frame_count = static_cast<int>(n);
    }
    const std::size_t n_cov = cov_count(arity);

    std::vector<std::pair<int, GaussianBox>> rows;
    for (++i; i < lines.size(); ++i) {
        const auto& [number, line] = lines[i];
        if (line.front() == '#') continue;
        const auto f = split(line, ',');
        if (f.size() != 7 + n_cov) {
            throw ParseError("expected " + std::to_string(7 + n_cov) + " fields for cov=" + to_string(arity) + ", got " +
                                 std::to_string(f.size()),
                             number);
        }
        const int frame = parse_frame(f[0], number);
        GaussianBox d;
        d.mean = {parse_double(f[1], number, "x1"), parse_double(f[2], number, "y1"), parse_double(f[3], number, "x2"),
                  parse_double(f[4], number, "y2")};
        if (!d.mean.valid()) throw ParseError("box corners inverted", number);
        d.score = parse_double(f[5], number, "score");
        if (d.score < 0.0 || d.score > 1.0) throw ParseError("score outside [0, 1]", number);
        d.label = parse_label(f[6], number);
        d.has_cov = arity != CovArity::None;
        Mat4 raw = Mat4::Zero();
        if (arity == CovArity::Diag4) {
            for (int k = 0; k < 4; ++k) raw(k, k) = parse_double(f[7 + k], number, "variance");
        } else if (arity == CovArity::Full10) {
            std::size_t k = 7;
            for (int r = 0; r < 4; ++r) {
                for (int c = r; c < 4; ++c) {
                    raw(r, c) = parse_double(f[k++], number, "covariance");
                    raw(c, r) = raw(r, c);
                }
            }
        }
        d.cov = arity == CovArity::None ? raw : validated_cov(raw, number);
        rows.emplace_back(frame, d);
    }
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    int last = frame_count;
    if (!rows.empty()) last = std::max(last, rows.back().first);
    Sequence seq(static_cast<std::size_t>(last));
    for (int k = 0; k < last; ++k) seq[k].frame = k + 1;
    for (auto& [frame, d] : rows) seq[frame - 1].dets.push_back(std::move(d));
    return seq;
}

Sequence load_detections(const std::filesystem::path& path) { return parse_detections(read_file(path)); }

std::string format_detections(const Sequence& seq, CovArity arity) {
    std::string out = std::string("cov=") + to_string(arity);
    int last = 0;
    for (const auto& f : seq) last = std::max(last, f.frame);
    out += ",frames=" + std::to_string(last) + "\n";
    for (const auto& f : seq) {
        for (const auto& d : f.dets) {
            out += std::to_string(f.frame);
            for (double v : {d.mean.x1, d.mean.y1, d.mean.x2, d.mean.y2, d.score}) out += "," + format_double(v);
            out += "," + std::to_string(d.label);
            if (arity == CovArity::Diag4) {
                for (int k = 0; k < 4; ++k) out += "," + format_double(d.cov(k, k));
            } else if (arity == CovArity::Full10) {
                for (int r = 0; r < 4; ++r)
                    for (int c = r; c < 4; ++c) out += "," + format_double(d.cov(r, c));
            }
            out += "\n";
        }
    }
    return out;
}

void write_detections(const std::filesystem::path& path, const Sequence& seq, CovArity arity) {
    write_file_atomic(path, format_detections(seq, arity));
}

// ---- ground truth ----

GtSequence parse_gt(std::string_view text) {
    std::map<int, std::vector<GtObject>> frames;
    int frame_count = 0;
    for (const auto& [number, line] : content_lines(text)) {
        if (line.front() == '#') {
            const auto body = trim(line.substr(1));
            if (body.rfind("frames=", 0) == 0) {
                const long n = parse_int(body.substr(7), number, "frame count");
                if (n < 0 || n > kMaxFrame) throw ParseError("frame count out of range", number);
                frame_count = static_cast<int>(n);
            }
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 8) throw ParseError("expected 8 fields, got " + std::to_string(f.size()), number);
        const int frame = parse_frame(f[0], number);
        GtObject o;
        o.id = parse_int(f[1], number, "id");
        if (o.id < 1) throw ParseError("object id must be >= 1", number);
        const double x = parse_double(f[2], number, "x");
        const double y = parse_double(f[3], number, "y");
        const double w = parse_double(f[4], number, "w");
        const double h = parse_double(f[5], number, "h");
        if (!(w > 0.0) || !(h > 0.0)) throw ParseError("box size must be positive", number);
        o.box = BoxTlbr::from_xywh(x, y, w, h);
        o.label = parse_label(f[6], number);
        o.visible = parse_int(f[7], number, "visibility") != 0;
        auto& objs = frames[frame];
        for (const auto& other : objs)
            if (other.id == o.id) throw ParseError("duplicate object id within a frame", number);
        objs.push_back(o);
    }
    int last = frame_count;
    if (!frames.empty()) last = std::max(last, frames.rbegin()->first);
    GtSequence gt(static_cast<std::size_t>(last));
    for (int k = 0; k < last; ++k) gt[k].frame = k + 1;
    for (auto& [frame, objs] : frames) gt[frame - 1].objects = std::move(objs);
    return gt;
}

GtSequence load_gt(const std::filesystem::path& path) { return parse_gt(read_file(path)); }

std::string format_gt(const GtSequence& gt) {
    int last = 0;
    for (const auto& f : gt) last = std::max(last, f.frame);
    std::string out = "# frames=" + std::to_string(last) + "\n";
    for (const auto& f : gt) {
        auto objs = f.objects;
        std::sort(objs.begin(), objs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        for (const auto& o : objs) {
            out += std::to_string(f.frame) + "," + std::to_string(o.id);
            for (double v : {o.box.x1, o.box.y1, o.box.width(), o.box.height()}) out += "," + format_double(v);
            out += "," + std::to_string(o.label) + "," + (o.visible ? "1" : "0") + "\n";
        }
    }
    return out;
}

void write_gt(const std::filesystem::path& path, const GtSequence& gt) { write_file_atomic(path, format_gt(gt)); }

// ---- results ----

std::vector<FrameResult> parse_results(std::string_view text) {
    std::map<int, std::vector<TrackOutput>> frames;
    for (const auto& [number, line] : content_lines(text)) {
        if (line.front() == '#') continue;
        const auto f = split(line, ',');
        if (f.size() != 10) throw ParseError("expected 10 fields, got " + std::to_string(f.size()), number);
        const int frame = parse_frame(f[0], number);
        TrackOutput o;
        o.id = parse_int(f[1], number, "id");
        const double x = parse_double(f[2], number, "x");
        const double y = parse_double(f[3], number, "y");
        const double w = parse_double(f[4], number, "w");
        const double h = parse_double(f[5], number, "h");
        if (w < 0.0 || h < 0.0) throw ParseError("box size must be non-negative", number);
        o.box = BoxTlbr::from_xywh(x, y, w, h);
        o.score = parse_double(f[6], number, "score");
        o.label = parse_label(f[7], number);
        auto& outs = frames[frame];
        for (const auto& other : outs)
            if (other.id == o.id) throw ParseError("duplicate track id within a frame", number);
        outs.push_back(o);
    }
    std::vector<FrameResult> results;
    for (auto& [frame, outs] : frames) {
        std::sort(outs.begin(), outs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        results.push_back({frame, std::move(outs)});
    }
    return results;
}

std::vector<FrameResult> load_results(const std::filesystem::path& path) { return parse_results(read_file(path)); }

std::string format_results(std::span<const FrameResult> results) {
    std::vector<const FrameResult*> order;
    for (const auto& r : results) order.push_back(&r);
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->frame < b->frame; });

    std::string out = "# frame,id,x,y,w,h,score,label,-1,-1\n";
    for (const auto* r : order) {
        auto outs = r->outputs;
        std::sort(outs.begin(), outs.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        for (const auto& o : outs) {
            out += std::to_string(r->frame) + "," + std::to_string(o.id);
            for (double v : {o.box.x1, o.box.y1, o.box.width(), o.box.height(), o.score}) out += "," + format_fixed3(v);
            out += "," + std::to_string(o.label) + ",-1,-1\n";
        }
    }
    return out;
}

void write_results(const std::filesystem::path& path, std::span<const FrameResult> results) {
    write_file_atomic(path, format_results(results));
}

}  // namespace utrack::io
