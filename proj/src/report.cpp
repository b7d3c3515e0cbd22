#include "mctl/report.hpp"

#include "mctl/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#ifndef MCTL_VERSION
#define MCTL_VERSION "unknown"
#endif

namespace mctl {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw InputError("cannot write '" + path.string() + "'");
    return out;
}

std::string fmt(double value, int precision = 6) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << value;
    return out.str();
}

std::string sci(double value) {
    std::ostringstream out;
    out << std::setprecision(std::numeric_limits<double>::max_digits10) << value;
    return out.str();
}

std::string escape_xml(const std::string& text) {
    std::string out;
    for (char c : text) {
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

struct Panel {
    std::string name;
    std::string color;
    std::vector<double> values;
};

void draw_panel(std::ostream& svg, const Panel& panel, double x0, double y0, double w, double h) {
    constexpr double pad_left = 70, pad_right = 15, pad_top = 25, pad_bottom = 30;
    const double px = x0 + pad_left, py = y0 + pad_top;
    const double pw = w - pad_left - pad_right, ph = h - pad_top - pad_bottom;
    svg << "<rect x=\"" << px << "\" y=\"" << py << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#999\"/>\n";
    svg << "<text x=\"" << px << "\" y=\"" << y0 + 16 << "\" font-size=\"13\">" << escape_xml(panel.name)
        << "</text>\n";
    if (panel.values.empty())
        return;
    auto [lo_it, hi_it] = std::minmax_element(panel.values.begin(), panel.values.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
        lo -= 0.5;
        hi += 0.5;
    }
    const std::size_t count = panel.values.size();
    auto sx = [&](std::size_t i) {
        return count == 1 ? px + pw / 2 : px + pw * static_cast<double>(i) / static_cast<double>(count - 1);
    };
    auto sy = [&](double v) { return py + ph * (1.0 - (v - lo) / (hi - lo)); };
    svg << "<polyline fill=\"none\" stroke=\"" << panel.color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < count; ++i)
        svg << (i ? " " : "") << sx(i) << ',' << sy(panel.values[i]);
    svg << "\"/>\n";
    for (std::size_t i = 0; i < count; ++i)
        svg << "<circle cx=\"" << sx(i) << "\" cy=\"" << sy(panel.values[i]) << "\" r=\"2.5\" fill=\""
            << panel.color << "\"/>\n";
    svg << "<text x=\"" << px - 5 << "\" y=\"" << py + 10 << "\" font-size=\"10\" text-anchor=\"end\">"
        << std::setprecision(4) << hi << "</text>\n";
    svg << "<text x=\"" << px - 5 << "\" y=\"" << py + ph << "\" font-size=\"10\" text-anchor=\"end\">"
        << std::setprecision(4) << lo << "</text>\n";
    svg << "<text x=\"" << px << "\" y=\"" << py + ph + 15 << "\" font-size=\"10\">1</text>\n";
    svg << "<text x=\"" << px + pw << "\" y=\"" << py + ph + 15 << "\" font-size=\"10\" text-anchor=\"end\">"
        << count << "</text>\n";
    svg << "<text x=\"" << px + pw / 2 << "\" y=\"" << py + ph + 25
        << "\" font-size=\"10\" text-anchor=\"middle\">iteration</text>\n";
}

} // namespace

std::string version_string() {
    return MCTL_VERSION;
}

void write_results_csv(const std::filesystem::path& path, const std::vector<RunResult>& rows) {
    auto out = open_for_write(path);
    out << "task,variant,seed,accuracy,iterations,wall_ms\n";
    for (const auto& r : rows)
        out << r.task << ',' << r.variant << ',' << r.seed << ',' << fmt(r.accuracy) << ',' << r.iterations << ','
            << fmt(r.wall_ms, 3) << '\n';
}

void write_convergence_csv(const std::filesystem::path& path, const std::vector<LossBreakdown>& history) {
    auto out = open_for_write(path);
    out << "iter,lgdm,ggdm,nuclear,penalty,total\n";
    for (std::size_t i = 0; i < history.size(); ++i) {
        const auto& h = history[i];
        out << i + 1 << ',' << sci(h.lgdm) << ',' << sci(h.ggdm) << ',' << sci(h.nuclear) << ','
            << sci(h.penalty) << ',' << sci(h.total) << '\n';
    }
}

void write_convergence_svg(const std::filesystem::path& path, const std::vector<LossBreakdown>& history,
                           const std::string& title) {
    std::vector<Panel> panels = {{"total (augmented Lagrangian)", "#1f77b4", {}},
                                 {"LGDM (manifold term)", "#d62728", {}},
                                 {"GGDM (mean discrepancy)", "#2ca02c", {}},
                                 {"nuclear norm of J", "#9467bd", {}}};
    for (const auto& h : history) {
        panels[0].values.push_back(h.total);
        panels[1].values.push_back(h.lgdm);
        panels[2].values.push_back(h.ggdm);
        panels[3].values.push_back(h.nuclear);
    }
    constexpr double w = 420, h = 240;
    auto svg = open_for_write(path);
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * w << "\" height=\"" << 2 * h + 30
        << "\" font-family=\"sans-serif\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"10\" y=\"20\" font-size=\"15\">" << escape_xml(title) << "</text>\n";
    for (std::size_t i = 0; i < panels.size(); ++i)
        draw_panel(svg, panels[i], (i % 2) * w, 30 + static_cast<double>(i / 2) * h, w, h);
    svg << "</svg>\n";
}

AccuracySummary summarize(const std::string& variant, const std::vector<double>& accuracies) {
    AccuracySummary s;
    s.variant = variant;
    s.runs = accuracies.size();
    if (accuracies.empty())
        return s;
    s.mean = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / static_cast<double>(s.runs);
    if (s.runs > 1) {
        double ss = 0.0;
        for (double a : accuracies)
            ss += (a - s.mean) * (a - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(s.runs - 1));
    }
    return s;
}

void write_ablation_csv(const std::filesystem::path& path, const std::vector<AccuracySummary>& rows) {
    auto out = open_for_write(path);
    out << "variant,mean_accuracy,std_accuracy,seeds,mean_drop\n";
    const double reference = rows.empty() ? 0.0 : rows.front().mean;
    for (const auto& r : rows)
        out << r.variant << ',' << fmt(r.mean) << ',' << fmt(r.stddev) << ',' << r.runs << ','
            << fmt(reference - r.mean) << '\n';
}

void write_compare_csv(const std::filesystem::path& path, const std::vector<PairedAccuracy>& rows) {
    auto out = open_for_write(path);
    out << "seed,mctl_accuracy,mctl_s_accuracy,gap\n";
    double sum_a = 0.0, sum_b = 0.0;
    for (const auto& r : rows) {
        out << r.seed << ',' << fmt(r.mctl) << ',' << fmt(r.mctl_s) << ',' << fmt(r.mctl - r.mctl_s) << '\n';
        sum_a += r.mctl;
        sum_b += r.mctl_s;
    }
    if (!rows.empty()) {
        const double n = static_cast<double>(rows.size());
        out << "mean," << fmt(sum_a / n) << ',' << fmt(sum_b / n) << ',' << fmt((sum_a - sum_b) / n) << '\n';
    }
}

void write_manifest(const std::filesystem::path& path, const std::string& command, const ExperimentConfig& cfg,
                    int threads) {
    nlohmann::json m;
    m["command"] = command;
    m["version"] = version_string();
    m["threads"] = threads;
    m["seeds"] = cfg.seed_list();
    m["config"] = to_json(cfg);
    auto out = open_for_write(path);
    out << m.dump(2) << '\n';
}

} // namespace mctl
