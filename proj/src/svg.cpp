#include "utrack/svg.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "utrack/io.hpp"

namespace utrack::svg {

namespace {

std::string num(double v) { return io::format_fixed3(v); }

void rect(std::string& out, const BoxTlbr& b, const char* color, const char* cls, const std::string& label) {
    out += "  <rect class=\"" + std::string(cls) + "\" x=\"" + num(b.x1) + "\" y=\"" + num(b.y1) + "\" width=\"" +
           num(b.width()) + "\" height=\"" + num(b.height()) + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    if (!label.empty()) {
        out += "  <text x=\"" + num(b.x1) + "\" y=\"" + num(b.y1 - 3.0) + "\" fill=\"" + color +
               "\" font-size=\"12\">" + label + "</text>\n";
    }
}

void ellipse(std::string& out, double cx, double cy, const CornerEllipse& e, const char* cls) {
    const double deg = e.orientation * 180.0 / std::numbers::pi;
    out += "  <ellipse class=\"" + std::string(cls) + "\" cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" rx=\"" +
           num(0.5 * e.a) + "\" ry=\"" + num(0.5 * e.b) + "\" transform=\"rotate(" + num(deg) + " " + num(cx) + " " +
           num(cy) + ")\" fill=\"none\" stroke=\"" + kColorEllipse + "\" stroke-width=\"1\"/>\n";
}

}  // namespace

std::string render(const Scene& scene) {
    std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(scene.width) + "\" height=\"" +
           num(scene.height) + "\" viewBox=\"0 0 " + num(scene.width) + " " + num(scene.height) + "\">\n";
    out += "  <title>frame " + std::to_string(scene.frame) + "</title>\n";
    out += "  <rect class=\"background\" x=\"0\" y=\"0\" width=\"" + num(scene.width) + "\" height=\"" +
           num(scene.height) + "\" fill=\"white\"/>\n";

    const bool eval_layer = scene.events != nullptr;
    if (eval_layer) {
        const auto& ev = *scene.events;
        std::set<std::size_t> switched(ev.switches.begin(), ev.switches.end());
        for (auto g : ev.misses) rect(out, scene.gt[g].box, kColorMiss, "fn", "gt " + std::to_string(scene.gt[g].id));
        for (auto p : ev.false_positives)
            rect(out, scene.pred[p].box, kColorFalsePos, "fp", "id " + std::to_string(scene.pred[p].id));
        for (const auto& [g, p] : ev.matches) {
            const bool sw = switched.count(p) > 0;
            rect(out, scene.pred[p].box, sw ? kColorSwitch : kColorCorrect, sw ? "ids" : "tp",
                 "id " + std::to_string(scene.pred[p].id));
        }
    }
    for (const auto& d : scene.dets) {
        if (!eval_layer) rect(out, d.mean, kColorCorrect, "det", "");
        const auto [tl, br] = probdet::corner_ellipses_95(d);
        ellipse(out, d.mean.x1, d.mean.y1, tl, "corner-tl");
        ellipse(out, d.mean.x2, d.mean.y2, br, "corner-br");
    }
    out += "</svg>\n";
    return out;
}

}  // namespace utrack::svg
