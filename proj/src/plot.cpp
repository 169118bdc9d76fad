#include "caslab/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "caslab/config.hpp"
#include "caslab/hamiltonians.hpp"

namespace caslab {

namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 640.0, kHeight = 400.0;
constexpr double kLeft = 64.0, kRight = 16.0, kTop = 32.0, kBottom = 48.0;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fixed2(double v) {
    if (std::abs(v) < 0.005) v = 0.0;  // avoid "-0.00"
    char buf[48];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

std::string tick_label(double v) {
    if (std::abs(v) < 1e-12) return "0";
    char buf[48];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 3);
    return std::string(buf, res.ptr);
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    double x0, x1, y0, y1;
    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

class Svg {
public:
    Svg(const std::string& title, const std::string& xlabel, const std::string& ylabel, Frame f) : f_(f) {
        os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\" "
               "font-family=\"sans-serif\" font-size=\"12\">\n";
        os_ << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
        os_ << "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
        const double bx = kLeft, by = kHeight - kBottom;
        os_ << "<g stroke=\"black\" fill=\"none\">\n";
        os_ << "<line x1=\"" << fixed2(bx) << "\" y1=\"" << fixed2(by) << "\" x2=\"" << fixed2(kWidth - kRight)
            << "\" y2=\"" << fixed2(by) << "\"/>\n";
        os_ << "<line x1=\"" << fixed2(bx) << "\" y1=\"" << fixed2(by) << "\" x2=\"" << fixed2(bx) << "\" y2=\""
            << fixed2(kTop) << "\"/>\n";
        os_ << "</g>\n";
        for (int i = 0; i <= 4; ++i) {
            const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
            const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
            const double x = f.px(xv), y = f.py(yv);
            os_ << "<line x1=\"" << fixed2(x) << "\" y1=\"" << fixed2(by) << "\" x2=\"" << fixed2(x) << "\" y2=\""
                << fixed2(by + 5) << "\" stroke=\"black\"/>\n";
            os_ << "<text x=\"" << fixed2(x) << "\" y=\"" << fixed2(by + 18) << "\" text-anchor=\"middle\">"
                << tick_label(xv) << "</text>\n";
            os_ << "<line x1=\"" << fixed2(bx - 5) << "\" y1=\"" << fixed2(y) << "\" x2=\"" << fixed2(bx) << "\" y2=\""
                << fixed2(y) << "\" stroke=\"black\"/>\n";
            os_ << "<text x=\"" << fixed2(bx - 8) << "\" y=\"" << fixed2(y + 4) << "\" text-anchor=\"end\">"
                << tick_label(yv) << "</text>\n";
        }
        os_ << "<text x=\"" << fixed2((kLeft + kWidth - kRight) / 2) << "\" y=\"" << fixed2(kHeight - 10)
            << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
        os_ << "<text x=\"16\" y=\"" << fixed2((kTop + kHeight - kBottom) / 2)
            << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << fixed2((kTop + kHeight - kBottom) / 2)
            << ")\">" << escape(ylabel) << "</text>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color, bool dashed = false) {
        if (pts.empty()) return;
        os_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
            << (dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            os_ << (i ? " " : "") << fixed2(f_.px(pts[i].first)) << "," << fixed2(f_.py(pts[i].second));
        }
        os_ << "\"/>\n";
    }

    void series(const std::vector<Series>& all) {
        for (std::size_t s = 0; s < all.size(); ++s) {
            const std::string color = kPalette[s % std::size(kPalette)];
            // NaN values split a series into separate segments.
            std::vector<std::pair<double, double>> run;
            for (const auto& pt : all[s].points) {
                if (std::isfinite(pt.second)) {
                    run.push_back(pt);
                } else {
                    polyline(run, color);
                    run.clear();
                }
            }
            polyline(run, color);
        }
        if (all.size() > 1 && all.size() <= 8) {
            for (std::size_t s = 0; s < all.size(); ++s) {
                const double y = kTop + 8 + 14.0 * static_cast<double>(s);
                os_ << "<text x=\"" << fixed2(kWidth - kRight - 4) << "\" y=\"" << fixed2(y + 4)
                    << "\" text-anchor=\"end\" fill=\"" << kPalette[s % std::size(kPalette)] << "\">"
                    << escape(all[s].label) << "</text>\n";
            }
        }
    }

    void hline(double y, const std::string& color) {
        polyline({{f_.x0, y}, {f_.x1, y}}, color, true);
    }

    void bar(double x0, double x1, double y, std::size_t count) {
        const double top = f_.py(y), base = f_.py(0.0);
        os_ << "<rect x=\"" << fixed2(f_.px(x0)) << "\" y=\"" << fixed2(top) << "\" width=\""
            << fixed2(f_.px(x1) - f_.px(x0)) << "\" height=\"" << fixed2(base - top)
            << "\" fill=\"#aec7e8\" stroke=\"#1f77b4\" data-count=\"" << count << "\"/>\n";
    }

    std::string finish() {
        os_ << "</svg>\n";
        return os_.str();
    }

private:
    Frame f_;
    std::ostringstream os_;
};

std::vector<double> column(const Table& t, const std::string& name) {
    const auto idx = t.column_index(name);
    std::vector<double> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        try {
            out.push_back(cell_number(row[idx]));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("column '" + name + "': " + e.what());
        }
    }
    return out;
}

std::string first_present(const Table& t, const std::vector<std::string>& names) {
    for (const auto& n : names) {
        if (t.has_column(n)) return n;
    }
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : " or ") + n;
    throw ConfigError("missing column " + list);
}

// Splits rows into series keyed by a grouping column when one is present.
std::vector<Series> grouped(const Table& t, const std::string& xcol, const std::string& ycol) {
    const auto xs = column(t, xcol), ys = column(t, ycol);
    std::string group;
    for (const char* g : {"k", "trajectory", "run"}) {
        if (t.has_column(g)) {
            group = g;
            break;
        }
    }
    std::vector<Series> out;
    if (group.empty()) {
        out.push_back({ycol, {}});
        for (std::size_t i = 0; i < xs.size(); ++i) out[0].points.emplace_back(xs[i], ys[i]);
        return out;
    }
    const auto gi = t.column_index(group);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const auto key = format_cell(t.rows[i][gi]);
        auto [it, fresh] = index.emplace(key, out.size());
        if (fresh) out.push_back({group + "=" + key, {}});
        out[it->second].points.emplace_back(xs[i], ys[i]);
    }
    return out;
}

Frame frame_for(const std::vector<Series>& all, std::optional<std::pair<double, double>> yfixed, bool y_from_zero) {
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : all) {
        for (const auto& [x, y] : s.points) {
            if (std::isfinite(x)) {
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
            }
            if (std::isfinite(y)) {
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
        }
    }
    if (!std::isfinite(x0)) throw ConfigError("no finite data to plot");
    if (x1 <= x0) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if (yfixed) {
        y0 = yfixed->first;
        y1 = yfixed->second;
    } else {
        if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
        if (y_from_zero) y0 = std::min(0.0, y0);
        if (y1 <= y0) y1 = y0 + 1.0;
        y1 += 0.05 * (y1 - y0);
    }
    return {x0, x1, y0, y1};
}

std::string plot_spacing(const Table& t) {
    std::vector<double> s;
    for (double v : column(t, "spacing")) {
        if (std::isfinite(v)) s.push_back(v);
    }
    if (s.size() < 2) throw ConfigError("spacing plot needs at least two spacings");
    const auto h = histogram(s, 40, 0.0, 4.0);
    const double q = fit_brody(s);
    double ymax = 0.0;
    for (auto c : h.counts) ymax = std::max(ymax, static_cast<double>(c) / (static_cast<double>(s.size()) * h.width()));
    std::vector<std::pair<double, double>> brody, poisson, wigner;
    for (int i = 0; i <= 200; ++i) {
        const double x = 4.0 * i / 200.0;
        brody.emplace_back(x, brody_density(x, q));
        poisson.emplace_back(x, brody_density(x, 0.0));
        wigner.emplace_back(x, brody_density(x, 1.0));
        ymax = std::max(ymax, brody.back().second);
    }
    Svg svg("Level spacings, Brody q = " + tick_label(q), "s", "P(s)", Frame{0.0, 4.0, 0.0, ymax * 1.1});
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        const double lo = h.lo + h.width() * static_cast<double>(b);
        svg.bar(lo, lo + h.width(), static_cast<double>(h.counts[b]) / (static_cast<double>(s.size()) * h.width()),
                h.counts[b]);
    }
    svg.polyline(poisson, "#7f7f7f", true);
    svg.polyline(wigner, "#2ca02c", true);
    svg.polyline(brody, "#d62728");
    return svg.finish();
}

}  // namespace

std::string to_string(PlotKind kind) {
    switch (kind) {
        case PlotKind::survival: return "survival";
        case PlotKind::entropy: return "entropy";
        case PlotKind::amplitude_race: return "amplitude_race";
        case PlotKind::dominance: return "dominance";
        case PlotKind::spacing: return "spacing";
        case PlotKind::chsh: return "chsh";
    }
    return "?";
}

PlotKind plot_kind_from_string(const std::string& name) {
    for (auto k : {PlotKind::survival, PlotKind::entropy, PlotKind::amplitude_race, PlotKind::dominance,
                   PlotKind::spacing, PlotKind::chsh}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("plot kind must be survival, entropy, amplitude_race, dominance, spacing or chsh");
}

std::vector<std::string> required_columns(PlotKind kind) {
    switch (kind) {
        case PlotKind::survival: return {"time", "survival|mean_survival"};
        case PlotKind::entropy: return {"time", "entropy|mean_entropy"};
        case PlotKind::amplitude_race: return {"time", "a*"};
        case PlotKind::dominance: return {"temperature", "dominance_probability"};
        case PlotKind::spacing: return {"spacing"};
        case PlotKind::chsh: return {"theta|b", "s"};
    }
    return {};
}

std::size_t Histogram::total() const {
    std::size_t n = 0;
    for (auto c : counts) n += c;
    return n;
}

Histogram histogram(const std::vector<double>& values, std::size_t bins, double lo, double hi) {
    if (bins == 0 || !(hi > lo)) throw std::invalid_argument("histogram: need bins > 0 and hi > lo");
    Histogram h{lo, hi, std::vector<std::size_t>(bins, 0)};
    for (double v : values) {
        if (std::isnan(v)) throw std::invalid_argument("histogram: NaN sample");
        const double pos = (v - lo) / (hi - lo) * static_cast<double>(bins);
        const auto b = pos <= 0.0 ? std::size_t{0} : std::min(bins - 1, static_cast<std::size_t>(pos));
        ++h.counts[b];
    }
    return h;
}

std::string render_plot(const Table& t, PlotKind kind) {
    if (t.columns.empty() || t.rows.empty()) throw ConfigError("results table is empty");
    switch (kind) {
        case PlotKind::survival:
        case PlotKind::entropy: {
            const bool surv = kind == PlotKind::survival;
            if (!t.has_column("time")) throw ConfigError("missing column time");
            const auto y = first_present(t, surv ? std::vector<std::string>{"survival", "mean_survival"}
                                                 : std::vector<std::string>{"entropy", "mean_entropy"});
            const auto all = grouped(t, "time", y);
            const auto f = surv ? frame_for(all, std::pair{0.0, 1.05}, true) : frame_for(all, std::nullopt, true);
            Svg svg(surv ? "Survival probability" : "Half-chain entanglement entropy", "time",
                    surv ? "survival" : "entropy (nats)", f);
            svg.series(all);
            return svg.finish();
        }
        case PlotKind::amplitude_race: {
            if (!t.has_column("time")) throw ConfigError("missing column time");
            const auto xs = column(t, "time");
            std::vector<Series> all;
            for (const auto& c : t.columns) {
                if (c.size() < 2 || c[0] != 'a' || !std::all_of(c.begin() + 1, c.end(), ::isdigit)) continue;
                const auto ys = column(t, c);
                Series s{c, {}};
                // Step shape: each amplitude holds its post-event value until the next event.
                for (std::size_t i = 0; i < xs.size(); ++i) {
                    if (i) s.points.emplace_back(xs[i], s.points.back().second);
                    s.points.emplace_back(xs[i], ys[i]);
                }
                all.push_back(std::move(s));
            }
            if (all.empty()) throw ConfigError("missing amplitude columns a0, a1, ...");
            Svg svg("Basis amplitude race", "time", "amplitude", frame_for(all, std::nullopt, true));
            svg.series(all);
            return svg.finish();
        }
        case PlotKind::dominance: {
            for (const char* c : {"temperature", "dominance_probability"}) {
                if (!t.has_column(c)) throw ConfigError(std::string("missing column ") + c);
            }
            const auto all = grouped(t, "temperature", "dominance_probability");
            Svg svg("Dominance probability vs temperature", "T", "P(dominance)", frame_for(all, std::pair{0.0, 1.05}, true));
            svg.series(all);
            return svg.finish();
        }
        case PlotKind::spacing:
            if (!t.has_column("spacing")) throw ConfigError("missing column spacing");
            return plot_spacing(t);
        case PlotKind::chsh: {
            const auto x = first_present(t, {"theta", "b"});
            if (!t.has_column("s")) throw ConfigError("missing column s");
            const auto all = grouped(t, x, "s");
            Svg svg("CHSH value vs angle", x, "S", frame_for(all, std::pair{-3.0, 3.0}, false));
            svg.hline(2.0, "#7f7f7f");
            svg.hline(-2.0, "#7f7f7f");
            svg.hline(2.0 * std::sqrt(2.0), "#2ca02c");
            svg.series(all);
            return svg.finish();
        }
    }
    throw ConfigError("unknown plot kind");
}

void plot_file(const fs::path& csv, PlotKind kind, const fs::path& svg) {
    std::ifstream in(csv, std::ios::binary);
    if (!in) throw ConfigError("cannot read results file '" + csv.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    Table t;
    try {
        t = parse_csv(ss.str());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(csv.string() + ": " + e.what());
    }
    const auto text = render_plot(t, kind);
    if (!svg.parent_path().empty()) fs::create_directories(svg.parent_path());
    fs::path tmp = svg;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << text;
    }
    fs::rename(tmp, svg);
}

}  // namespace caslab
