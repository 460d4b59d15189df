#include "randomkit/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace randomkit {

using nlohmann::json;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

// Labels such as "BCDWIT(2/3,3)" contain commas, so they are quoted when needed.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw std::runtime_error("unterminated quote in CSV line: " + line);
    fields.push_back(std::move(cur));
    return fields;
}

double parse_csv_number(const std::string& s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw std::runtime_error("bad number in CSV: '" + s + "'");
    return v;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

void write_series_csv(std::ostream& out, std::span<const MetricSeries> series) {
    out << "procedure,step,estimate,se\n";
    for (const auto& s : series) {
        const std::string name = csv_field(s.label);
        for (int j = 0; j < s.steps(); ++j) {
            out << name << ',' << j + 1 << ',' << format_double(s.estimate[static_cast<std::size_t>(j)]) << ',';
            if (s.has_se()) out << format_double(s.se[static_cast<std::size_t>(j)]);
            out << '\n';
        }
    }
}

std::vector<MetricSeries> read_series_csv(std::istream& in, const std::string& metric) {
    std::string line;
    if (!std::getline(in, line) || line != "procedure,step,estimate,se") {
        throw std::runtime_error("series CSV must start with 'procedure,step,estimate,se'");
    }
    std::vector<MetricSeries> out;
    std::vector<bool> any_se;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 4) throw std::runtime_error("expected 4 fields: " + line);
        if (out.empty() || out.back().label != f[0]) {
            out.push_back(MetricSeries{metric, f[0], {}, {}});
            any_se.push_back(false);
        }
        auto& s = out.back();
        if (std::stoi(f[1]) != s.steps() + 1) throw std::runtime_error("steps out of order: " + line);
        s.estimate.push_back(parse_csv_number(f[2]));
        if (!f[3].empty()) any_se.back() = true;
        s.se.push_back(f[3].empty() ? 0.0 : parse_csv_number(f[3]));
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!any_se[i]) out[i].se.clear();
    }
    return out;
}

void write_final_imb_csv(std::ostream& out, std::span<const FinalImbalanceSample> samples) {
    out << "procedure,replicate,value\n";
    for (const auto& s : samples) {
        out << csv_field(s.label) << ',' << s.replicate << ',' << format_double(s.value) << '\n';
    }
}

void write_arp_csv(std::ostream& out, std::span<const ArpTable> tables) {
    out << "procedure,step,arm,pi,se\n";
    for (const auto& t : tables) {
        const std::string name = csv_field(t.label);
        for (int j = 0; j < t.steps; ++j) {
            for (int k = 0; k < t.arms; ++k) {
                out << name << ',' << j + 1 << ',' << k + 1 << ',' << format_double(t.at(j, k)) << ','
                    << format_double(t.se_at(j, k)) << '\n';
            }
        }
    }
}

void write_assignments_csv(std::ostream& out, const TrialPath& path, int arms) {
    out << "step,arm";
    for (int k = 1; k <= arms; ++k) out << ",N_" << k;
    out << '\n';
    std::vector<int> counts(static_cast<std::size_t>(arms));
    for (std::size_t j = 0; j < path.assignments.size(); ++j) {
        const int arm = path.assignments[j];
        counts[static_cast<std::size_t>(arm)] += 1;
        out << j + 1 << ',' << arm + 1;
        for (int c : counts) out << ',' << c;
        out << '\n';
    }
}

void write_probabilities_csv(std::ostream& out, const TrialPath& path, int arms) {
    out << "step";
    for (int k = 1; k <= arms; ++k) out << ",phi_" << k;
    out << '\n';
    for (std::size_t j = 0; j < path.probs.size(); ++j) {
        out << j + 1;
        for (double p : path.probs[j]) out << ',' << format_double(p);
        out << '\n';
    }
}

void print_sequence_table(std::ostream& out, const std::string& label, const TrialPath& path, int arms) {
    char buf[64];
    out << label << '\n';
    std::string header = " step  arm";
    for (int k = 1; k <= arms; ++k) {
        std::snprintf(buf, sizeof buf, "  %5s", ("N_" + std::to_string(k)).c_str());
        header += buf;
    }
    header += "  |";
    for (int k = 1; k <= arms; ++k) {
        std::snprintf(buf, sizeof buf, "  %8s", ("phi_" + std::to_string(k)).c_str());
        header += buf;
    }
    out << header << '\n';
    std::vector<int> counts(static_cast<std::size_t>(arms));
    for (std::size_t j = 0; j < path.assignments.size(); ++j) {
        const int arm = path.assignments[j];
        counts[static_cast<std::size_t>(arm)] += 1;
        std::snprintf(buf, sizeof buf, "%5zu  %3d", j + 1, arm + 1);
        out << buf;
        for (int c : counts) {
            std::snprintf(buf, sizeof buf, "  %5d", c);
            out << buf;
        }
        out << "  |";
        for (double p : path.probs[j]) {
            std::snprintf(buf, sizeof buf, "  %8.4f", p);
            out << buf;
        }
        out << '\n';
    }
}

json to_json(const MetricSeries& s) {
    json j{{"metric", s.metric}, {"procedure", s.label}};
    json rows = json::array();
    for (int i = 0; i < s.steps(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        rows.push_back({{"step", i + 1},
                        {"estimate", number_or_null(s.estimate[idx])},
                        {"se", s.has_se() ? number_or_null(s.se[idx]) : json(nullptr)}});
    }
    j["series"] = std::move(rows);
    return j;
}

json to_json(std::span<const FinalImbalanceSample> samples) {
    json rows = json::array();
    for (const auto& s : samples) {
        rows.push_back({{"procedure", s.label}, {"replicate", s.replicate}, {"value", number_or_null(s.value)}});
    }
    return rows;
}

json to_json(const ArpTable& t) {
    json rows = json::array();
    for (int j = 0; j < t.steps; ++j) {
        for (int k = 0; k < t.arms; ++k) {
            rows.push_back({{"step", j + 1},
                            {"arm", k + 1},
                            {"pi", number_or_null(t.at(j, k))},
                            {"se", number_or_null(t.se_at(j, k))}});
        }
    }
    const auto [dev, se] = t.max_deviation();
    return {{"procedure", t.label},
            {"rho", t.rho},
            {"max_deviation", dev},
            {"max_deviation_se", se},
            {"flagged", t.any_flagged()},
            {"pi", std::move(rows)}};
}

json to_json(const ComparisonReport& r) {
    auto entry = [](const ComparisonEntry& e) {
        json j{{"metric", e.metric},
               {"step", e.step},
               {"estimate", number_or_null(e.estimate)},
               {"se", number_or_null(e.se)},
               {"exact", number_or_null(e.exact)},
               {"z", number_or_null(e.z)}};
        if (e.metric == "arp") j["arm"] = e.arm;
        return j;
    };
    json failures = json::array();
    for (const auto& e : r.failures()) failures.push_back(entry(e));
    json j{{"procedure", r.label},  {"n", r.n},
           {"nsim", r.nsim},        {"seed", r.seed},
           {"z_limit", r.z_limit},  {"checks", r.entries.size()},
           {"passed", r.passed()},  {"failures", std::move(failures)}};
    if (!r.entries.empty()) j["worst"] = entry(r.worst());
    return j;
}

json to_json(const TrialPath& path) {
    json arms = json::array();
    for (int a : path.assignments) arms.push_back(a + 1);
    return {{"assignments", std::move(arms)}, {"probabilities", path.probs}};
}

json to_json(const SimulationResult& sr) {
    const auto& p = sr.cfg.params;
    json params{{"b", p.b},         {"p", p.p},         {"a", p.a},    {"gamma", p.gamma},
                {"lambda", p.lambda}, {"alpha", p.alpha}, {"eta", p.eta}};
    json replicates = json::array();
    for (int r = 0; r < sr.nsim; ++r) replicates.push_back(to_json(sr.path(r)));
    return {{"procedure", sr.label()},
            {"kind", std::string(kind_name(sr.cfg.kind))},
            {"params", std::move(params)},
            {"w", sr.cfg.target.weights},
            {"planned_n", sr.cfg.n},
            {"n", sr.n},
            {"nsim", sr.nsim},
            {"seed", sr.seed},
            {"replicates", std::move(replicates)}};
}

SimulationResult simulation_result_from_json(const json& j) {
    const auto kind = parse_kind(j.at("kind").get<std::string>());
    if (!kind) throw std::invalid_argument("unknown procedure kind in JSON");
    const auto& jp = j.at("params");
    ProcedureParams params;
    params.b = jp.at("b").get<int>();
    params.p = jp.at("p").get<double>();
    params.a = jp.at("a").get<double>();
    params.gamma = jp.at("gamma").get<double>();
    params.lambda = jp.at("lambda").get<int>();
    params.alpha = jp.at("alpha").get<double>();
    params.eta = jp.at("eta").get<double>();
    const auto weights = j.at("w").get<std::vector<double>>();

    SimulationResult sr;
    sr.cfg = make_config(*kind, normalize_target(weights), params, j.at("planned_n").get<int>());
    sr.n = j.at("n").get<int>();
    sr.nsim = j.at("nsim").get<int>();
    sr.seed = j.at("seed").get<std::uint64_t>();
    const auto K = static_cast<std::size_t>(sr.arms());
    const auto& reps = j.at("replicates");
    if (reps.size() != static_cast<std::size_t>(sr.nsim)) throw std::invalid_argument("replicate count mismatch");
    for (const auto& rep : reps) {
        const auto arms = rep.at("assignments").get<std::vector<int>>();
        const auto probs = rep.at("probabilities").get<std::vector<std::vector<double>>>();
        if (arms.size() != static_cast<std::size_t>(sr.n) || probs.size() != arms.size()) {
            throw std::invalid_argument("replicate length mismatch");
        }
        for (std::size_t t = 0; t < arms.size(); ++t) {
            if (arms[t] < 1 || static_cast<std::size_t>(arms[t]) > K || probs[t].size() != K) {
                throw std::invalid_argument("malformed replicate row");
            }
            sr.assignments.push_back(static_cast<std::uint8_t>(arms[t] - 1));
            sr.probs.insert(sr.probs.end(), probs[t].begin(), probs[t].end());
        }
    }
    return sr;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

const char* colour(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string tick_label(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", std::abs(x) < 1e-12 ? 0.0 : x);
    return buf;
}

struct Frame {
    double width = 720, height = 420;
    double left = 70, right = 190, top = 40, bottom = 50;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
    double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

std::string svg_open(double w, double h) {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
           num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " + num(h) +
           "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 12) {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\" font-size=\"" +
           std::to_string(size) + "\">" + xml_escape(s) + "</text>\n";
}

void pad_range(double& lo, double& hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    } else {
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
}

// Axes with five ticks on each side plus titles.
std::string axes(const Frame& f, const std::string& title, const std::string& x_label, const std::string& y_label) {
    std::string s;
    const double xa = f.left, xb = f.width - f.right, ya = f.height - f.bottom, yb = f.top;
    s += "<rect x=\"" + num(xa) + "\" y=\"" + num(yb) + "\" width=\"" + num(xb - xa) + "\" height=\"" +
         num(ya - yb) + "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = f.x0 + (f.x1 - f.x0) * t / 4.0;
        const double yv = f.y0 + (f.y1 - f.y0) * t / 4.0;
        s += "<line x1=\"" + num(f.px(xv)) + "\" y1=\"" + num(ya) + "\" x2=\"" + num(f.px(xv)) + "\" y2=\"" +
             num(ya + 5) + "\" stroke=\"#333\"/>\n";
        s += text(f.px(xv), ya + 18, tick_label(xv));
        s += "<line x1=\"" + num(xa - 5) + "\" y1=\"" + num(f.py(yv)) + "\" x2=\"" + num(xa) + "\" y2=\"" +
             num(f.py(yv)) + "\" stroke=\"#333\"/>\n";
        s += text(xa - 8, f.py(yv) + 4, tick_label(yv), "end");
    }
    s += text((xa + xb) / 2, 22, title, "middle", 14);
    s += text((xa + xb) / 2, f.height - 12, x_label);
    s += "<text x=\"16\" y=\"" + num((ya + yb) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num((ya + yb) / 2) + ")\">" + xml_escape(y_label) + "</text>\n";
    return s;
}

std::string legend(const Frame& f, const std::vector<std::string>& labels) {
    std::string s;
    const double x = f.width - f.right + 15;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = f.top + 10 + 18.0 * static_cast<double>(i);
        s += "<line x1=\"" + num(x) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x + 20) + "\" y2=\"" + num(y) +
             "\" stroke=\"" + colour(i) + "\" stroke-width=\"2\"/>\n";
        s += text(x + 26, y + 4, labels[i], "start");
    }
    return s;
}

std::string polyline(const Frame& f, const std::vector<std::pair<double, double>>& pts, const char* stroke,
                     const char* extra = "") {
    std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"1.5\"" + extra +
                    " points=\"";
    for (const auto& [x, y] : pts) {
        if (!std::isfinite(y)) continue;
        s += num(f.px(x)) + "," + num(f.py(y)) + " ";
    }
    return s + "\"/>\n";
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& y_label, std::span<const MetricSeries> series) {
    Frame f;
    int steps = 1;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : series) {
        steps = std::max(steps, s.steps());
        for (double v : s.estimate) {
            if (!std::isfinite(v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    pad_range(lo, hi);
    f.x0 = 1;
    f.x1 = std::max(2, steps);
    f.y0 = lo;
    f.y1 = hi;
    std::string s = svg_open(f.width, f.height) + axes(f, title, "step j", y_label);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < series.size(); ++i) {
        std::vector<std::pair<double, double>> pts;
        for (int j = 0; j < series[i].steps(); ++j) {
            pts.emplace_back(j + 1, series[i].estimate[static_cast<std::size_t>(j)]);
        }
        s += polyline(f, pts, colour(i));
        labels.push_back(series[i].label);
    }
    return s + legend(f, labels) + "</svg>\n";
}

std::string svg_heatmap(const std::string& title, std::span<const MetricSeries> series) {
    int steps = 1;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : series) {
        steps = std::max(steps, s.steps());
        for (double v : s.estimate) {
            if (!std::isfinite(v)) continue;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) hi = lo + 1.0;

    const double cell_w = std::max(4.0, 560.0 / steps), cell_h = 24.0;
    const double left = 130, top = 40;
    const double width = left + cell_w * steps + 120;
    const double height = top + cell_h * static_cast<double>(series.size()) + 50;
    // Two-segment ramp: dark blue -> yellow-green -> yellow.
    auto ramp = [&](double v) {
        const double t = std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
        const double stops[3][3] = {{68, 1, 84}, {33, 145, 140}, {253, 231, 37}};
        const int seg = t < 0.5 ? 0 : 1;
        const double u = t < 0.5 ? t * 2 : (t - 0.5) * 2;
        char buf[16];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                      static_cast<int>(stops[seg][0] + u * (stops[seg + 1][0] - stops[seg][0])),
                      static_cast<int>(stops[seg][1] + u * (stops[seg + 1][1] - stops[seg][1])),
                      static_cast<int>(stops[seg][2] + u * (stops[seg + 1][2] - stops[seg][2])));
        return std::string(buf);
    };

    std::string s = svg_open(width, height);
    s += text(left + cell_w * steps / 2, 22, title, "middle", 14);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double y = top + cell_h * static_cast<double>(i);
        s += text(left - 8, y + cell_h / 2 + 4, series[i].label, "end");
        for (int j = 0; j < series[i].steps(); ++j) {
            const double v = series[i].estimate[static_cast<std::size_t>(j)];
            s += "<rect x=\"" + num(left + cell_w * j) + "\" y=\"" + num(y) + "\" width=\"" + num(cell_w) +
                 "\" height=\"" + num(cell_h) + "\" fill=\"" + (std::isfinite(v) ? ramp(v) : "#cccccc") +
                 "\"><title>" + xml_escape(series[i].label) + " j=" + std::to_string(j + 1) + ": " +
                 tick_label(v) + "</title></rect>\n";
        }
    }
    const double axis_y = top + cell_h * static_cast<double>(series.size()) + 18;
    for (int j = 1; j <= steps; ++j) {
        if (j == 1 || j == steps || j % 10 == 0) s += text(left + cell_w * (j - 0.5), axis_y, std::to_string(j));
    }
    s += text(left + cell_w * steps / 2, axis_y + 20, "step j");
    // Colour bar.
    const double bar_x = left + cell_w * steps + 30;
    for (int t = 0; t < 20; ++t) {
        const double v = hi - (hi - lo) * t / 19.0;
        s += "<rect x=\"" + num(bar_x) + "\" y=\"" + num(top + 6.0 * t) + "\" width=\"14\" height=\"6\" fill=\"" +
             ramp(v) + "\"/>\n";
    }
    s += text(bar_x + 20, top + 8, tick_label(hi), "start");
    s += text(bar_x + 20, top + 120, tick_label(lo), "start");
    return s + "</svg>\n";
}

std::string svg_violin(const std::string& title, std::span<const FinalImbalanceSample> samples) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> groups;
    for (const auto& s : samples) {
        if (!std::isfinite(s.value)) continue;
        if (!groups.count(s.label)) order.push_back(s.label);
        groups[s.label].push_back(s.value);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& [_, v] : groups) {
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    pad_range(lo, hi);

    Frame f;
    f.right = 30;
    f.width = std::max(420.0, 110.0 * static_cast<double>(order.size()) + f.left + f.right);
    f.x0 = 0;
    f.x1 = static_cast<double>(std::max<std::size_t>(order.size(), 1));
    f.y0 = lo;
    f.y1 = hi;
    std::string s = svg_open(f.width, f.height);
    const double xa = f.left, xb = f.width - f.right, ya = f.height - f.bottom, yb = f.top;
    s += "<rect x=\"" + num(xa) + "\" y=\"" + num(yb) + "\" width=\"" + num(xb - xa) + "\" height=\"" +
         num(ya - yb) + "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double yv = lo + (hi - lo) * t / 4.0;
        s += text(xa - 8, f.py(yv) + 4, tick_label(yv), "end");
    }
    s += text((xa + xb) / 2, 22, title, "middle", 14);

    constexpr int kGrid = 80;
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto v = groups[order[i]];
        const double n = static_cast<double>(v.size());
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        const double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
        // Silverman's rule, floored so that discrete samples still render.
        const double h = std::max(1.06 * sd * std::pow(n, -0.2), (hi - lo) / 100.0);
        std::vector<double> dens(kGrid + 1);
        double peak = 0.0;
        std::sort(v.begin(), v.end());
        for (int g = 0; g <= kGrid; ++g) {
            const double y = lo + (hi - lo) * g / kGrid;
            double d = 0.0;
            // Only points within 5 bandwidths contribute noticeably.
            auto first = std::lower_bound(v.begin(), v.end(), y - 5 * h);
            auto last = std::upper_bound(v.begin(), v.end(), y + 5 * h);
            for (auto it = first; it != last; ++it) d += std::exp(-0.5 * ((y - *it) / h) * ((y - *it) / h));
            dens[static_cast<std::size_t>(g)] = d;
            peak = std::max(peak, d);
        }
        const double cx = f.px(static_cast<double>(i) + 0.5);
        const double half = 0.4 * (f.px(1) - f.px(0));
        std::string pts;
        for (int g = 0; g <= kGrid; ++g) {
            const double y = lo + (hi - lo) * g / kGrid;
            pts += num(cx + half * dens[static_cast<std::size_t>(g)] / std::max(peak, 1e-300)) + "," + num(f.py(y)) + " ";
        }
        for (int g = kGrid; g >= 0; --g) {
            const double y = lo + (hi - lo) * g / kGrid;
            pts += num(cx - half * dens[static_cast<std::size_t>(g)] / std::max(peak, 1e-300)) + "," + num(f.py(y)) + " ";
        }
        s += "<polygon points=\"" + pts + "\" fill=\"" + colour(i) + "\" fill-opacity=\"0.5\" stroke=\"" + colour(i) +
             "\"/>\n";
        s += "<line x1=\"" + num(cx - half / 2) + "\" y1=\"" + num(f.py(mean)) + "\" x2=\"" + num(cx + half / 2) +
             "\" y2=\"" + num(f.py(mean)) + "\" stroke=\"black\"/>\n";
        s += text(cx, ya + 18, order[i]);
    }
    return s + "</svg>\n";
}

std::string svg_arp_plot(const ArpTable& table) {
    Frame f;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : table.pi) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double r : table.rho) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    pad_range(lo, hi);
    f.x0 = 1;
    f.x1 = std::max(2, table.steps);
    f.y0 = lo;
    f.y1 = hi;
    std::string s = svg_open(f.width, f.height) +
                    axes(f, "Unconditional allocation probabilities: " + table.label, "step j", "pi_jk");
    std::vector<std::string> labels;
    for (int k = 0; k < table.arms; ++k) {
        const auto c = colour(static_cast<std::size_t>(k));
        const double r = table.rho[static_cast<std::size_t>(k)];
        s += polyline(f, {{f.x0, r}, {f.x1, r}}, c, " stroke-dasharray=\"4 3\"");
        std::vector<std::pair<double, double>> pts;
        for (int j = 0; j < table.steps; ++j) pts.emplace_back(j + 1, table.at(j, k));
        s += polyline(f, pts, c);
        labels.push_back("arm " + std::to_string(k + 1) + " (rho " + tick_label(r) + ")");
    }
    return s + legend(f, labels) + "</svg>\n";
}

}  // namespace randomkit
