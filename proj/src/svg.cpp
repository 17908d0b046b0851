#include "mwer/svg.hpp"

#include <algorithm>
#include <cstdio>

namespace mwer {

namespace {

constexpr const char* header_template =
    "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\" "
    "font-family=\"sans-serif\" font-size=\"11\">\n"
    "<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n";

constexpr const char* dot_template =
    "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.1f\" fill=\"%s\"><title>%s</title></circle>\n";

constexpr const char* tick_template =
    "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#333\" stroke-width=\"1\"/>\n";

constexpr const char* bar_template =
    "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"><title>%s</title></rect>\n";

constexpr const char* text_template = "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"%s\">%s</text>\n";

constexpr const char* color_correct = "#2e9d4b";
constexpr const char* color_error = "#d62728";
constexpr const char* color_not_yet = "#b0b0b0";
constexpr const char* color_wildcard = "#7fb3e0";

template <typename... Args>
std::string fill(const char* tmpl, Args... args)
{
    const int n = std::snprintf(nullptr, 0, tmpl, args...);
    std::string out(static_cast<std::size_t>(n) + 1, '\0');
    std::snprintf(out.data(), out.size(), tmpl, args...);
    out.pop_back();
    return out;
}

std::string escape(const std::string& text)
{
    std::string out;
    for (char c : text) {
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

const char* category_color(WordCategory c)
{
    switch (c) {
    case WordCategory::Correct: return color_correct;
    case WordCategory::Error: return color_error;
    case WordCategory::NotYetTranscribed: return color_not_yet;
    case WordCategory::WildcardAbsorbed: return color_wildcard;
    }
    return color_not_yet;
}

std::string step_title(const PartialStep& s)
{
    std::string t(word_category_name(s.category));
    t += ' ';
    t += step_kind_name(s.step.kind);
    if (s.step.ref_token) t += " ref=" + s.step.ref_token->text;
    if (s.step.hyp_token) t += " hyp=" + s.step.hyp_token->text;
    return escape(t);
}

} // namespace

std::string diagram_svg(const std::vector<PartialAlignmentRow>& rows)
{
    constexpr int width = 800;
    constexpr int left = 60;
    constexpr int right = 20;
    constexpr int row_height = 16;
    constexpr int top = 20;
    const int height = top + row_height * static_cast<int>(rows.size()) + 30;

    double t_max = 0.0;
    for (const auto& row : rows) {
        t_max = std::max({t_max, row.eval_time, row.audio_sent});
        for (const auto& s : row.steps) {
            t_max = std::max(t_max, s.center);
        }
    }
    if (t_max <= 0.0) {
        t_max = 1.0;
    }
    const double scale = (width - left - right) / t_max;
    auto x_of = [&](double t) { return left + std::max(0.0, t) * scale; };

    std::string svg = fill(header_template, width, height, width, height);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const double y = top + row_height * (static_cast<double>(r) + 0.5);
        svg += fill(text_template, left - 6.0, y + 4.0, "end", fill("%.2fs", row.eval_time).c_str());
        svg += fill(tick_template, x_of(row.audio_sent), y - 6.0, x_of(row.audio_sent), y + 6.0);
        for (const auto& s : row.steps) {
            const double radius = s.step.kind == StepKind::Insertion ? 2.5 : 4.0;
            svg += fill(dot_template, x_of(s.center), y, radius, category_color(s.category), step_title(s).c_str());
        }
    }
    const double axis_y = top + row_height * static_cast<double>(rows.size()) + 14.0;
    svg += fill(text_template, static_cast<double>(left), axis_y, "start", "0s");
    svg += fill(text_template, static_cast<double>(width - right), axis_y, "end", fill("%.2fs", t_max).c_str());
    svg += "</svg>\n";
    return svg;
}

std::string histogram_svg(const StreamingHistogram& h)
{
    constexpr int width = 800;
    constexpr int height = 300;
    constexpr int left = 40;
    constexpr int right = 20;
    constexpr int top = 20;
    constexpr int bottom = 40;
    const double plot_h = height - top - bottom;
    const double bar_w = h.bins() == 0 ? 0.0 : static_cast<double>(width - left - right) / static_cast<double>(h.bins());

    std::string svg = fill(header_template, width, height, width, height);
    for (std::size_t b = 0; b < h.bins(); ++b) {
        const std::size_t total = h.correct[b] + h.error[b] + h.not_yet[b];
        if (total == 0) {
            continue;
        }
        const double x = left + bar_w * static_cast<double>(b);
        double y = top + plot_h;
        const std::pair<std::size_t, const char*> parts[] = {
            {h.correct[b], color_correct}, {h.error[b], color_error}, {h.not_yet[b], color_not_yet}};
        for (const auto& [count, color] : parts) {
            const double bar_h = plot_h * static_cast<double>(count) / static_cast<double>(total);
            y -= bar_h;
            const std::string title = fill("[%.2f, %.2f) %zu/%zu", h.bin_edges[b], h.bin_edges[b + 1], count, total);
            svg += fill(bar_template, x, y, bar_w, bar_h, color, title.c_str());
        }
    }
    const double axis_y = top + plot_h + 16.0;
    if (!h.bin_edges.empty()) {
        svg += fill(text_template, static_cast<double>(left), axis_y, "start",
                    fill("%.2fs", h.bin_edges.front()).c_str());
        svg += fill(text_template, static_cast<double>(width - right), axis_y, "end",
                    fill("%.2fs", h.bin_edges.back()).c_str());
    }
    svg += fill(text_template, width / 2.0, axis_y + 16.0, "middle", "prescription (audio sent minus word center)");
    svg += "</svg>\n";
    return svg;
}

} // namespace mwer
