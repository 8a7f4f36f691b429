#include "gateseed/eval/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gateseed/common/errors.hpp"
#include "gateseed/common/parallel.hpp"
#include "gateseed/imagecore/perturb.hpp"

namespace gateseed::eval {

namespace fs = std::filesystem;

std::vector<Condition> default_conditions() {
    std::vector<Condition> out;
    for (int blur : {0, 7})
        for (double s : {1.0, 0.4, 0.2, 0.1}) out.push_back({s, blur, 0.0});
    return out;
}

imagecore::Image perturb(const imagecore::Image& img, const Condition& cond) {
    imagecore::Image out = cond.light_scale == 1.0 ? img : imagecore::scale_intensity(img, cond.light_scale);
    if (cond.blur_len > 1) out = imagecore::apply_motion_blur(out, cond.blur_len, cond.blur_angle);
    return out;
}

TestSet make_test_set(const std::vector<datagen::SceneSample>& samples, double d_max) {
    TestSet t;
    t.images.reserve(samples.size());
    for (const datagen::SceneSample& s : samples) {
        ImageDims dims{s.image.width(), s.image.height()};
        nn::EncodedLabels enc = nn::encode_grid_labels(s.labels, dims, d_max);
        t.images.push_back(s.image);
        t.targets.push_back(enc.target);
        t.masks.push_back(enc.mask);
    }
    return t;
}

std::vector<nn::TrainingSample> make_training_samples(const std::vector<datagen::SceneSample>& samples,
                                                      const imagecore::FilterSettings& filter, double d_max) {
    std::vector<nn::TrainingSample> out(samples.size());
    parallel_for(samples.size(), [&](std::size_t i) {
        const datagen::SceneSample& s = samples[i];
        ImageDims dims{s.image.width(), s.image.height()};
        nn::EncodedLabels enc = nn::encode_grid_labels(s.labels, dims, d_max);
        out[i] = {imagecore::apply_filter(s.image, filter), enc.target, enc.mask};
    });
    return out;
}

double measure_fps(const ModelEntry& model, const std::vector<imagecore::Image>& images, int frames) {
    if (images.empty() || frames < 1) throw InvalidArgument("fps measurement needs images and frames >= 1");
    using clock = std::chrono::steady_clock;
    auto start = clock::now();
    for (int f = 0; f < frames; ++f) {
        const imagecore::Image& img = images[static_cast<std::size_t>(f) % images.size()];
        imagecore::Image in = imagecore::apply_filter(img, model.filter);
        nn::Tensor batch = nn::make_batch(std::span<const imagecore::Image>(&in, 1));
        nn::Tensor out = nn::forward(model.params, batch, nn::Mode::Infer);
        (void)out;
    }
    double seconds = std::chrono::duration<double>(clock::now() - start).count();
    return frames / std::max(seconds, 1e-9);
}

std::vector<EvalReport> run_benchmark(const std::vector<ModelEntry>& models, const TestSet& test,
                                      const std::vector<Condition>& conditions, const BenchmarkOptions& opts) {
    if (test.images.size() != test.targets.size() || test.images.size() != test.masks.size())
        throw InvalidArgument("test set lists differ in length");
    const std::size_t nc = conditions.size();
    std::vector<EvalReport> reports(models.size() * nc);

    parallel_for(reports.size(), [&](std::size_t idx) {
        const ModelEntry& model = models[idx / nc];
        const Condition& cond = conditions[idx % nc];
        EvalReport& r = reports[idx];
        r.model = model.name;
        r.filter = imagecore::to_string(model.filter.kind);
        r.condition = cond;
        r.n_samples = static_cast<long>(test.images.size());
        try {
            std::vector<imagecore::Image> inputs(test.images.size());
            for (std::size_t i = 0; i < inputs.size(); ++i)
                inputs[i] = imagecore::apply_filter(perturb(test.images[i], cond), model.filter);
            std::vector<nn::GridPrediction> preds = nn::predict(model.params, inputs, opts.batch_size);
            MaeResult mae = compute_mae(preds, test.targets, test.masks, opts.metrics);
            FnResult fn = compute_fn_rate(preds, test.targets, test.masks, opts.metrics.conf_thresh);
            r.e_c = mae.e_c;
            r.e_d = mae.e_d;
            r.e_theta = mae.e_theta;
            r.matched = mae.matched;
            r.cells = std::move(mae.cells);
            r.fn_rate = fn.rate;
            r.false_negatives = fn.false_negatives;
            r.occupied = fn.occupied;
            r.false_positives = fn.false_positives;
            r.fn_undefined = fn.undefined;
        } catch (const std::exception& e) {
            r.failed = true;
            r.error = e.what();
        }
    });

    // Timing runs after the sweep so it is not competing with the workers.
    if (opts.measure_fps && !test.images.empty()) {
        for (std::size_t m = 0; m < models.size(); ++m) {
            double fps = 0.0;
            try {
                fps = measure_fps(models[m], test.images, opts.fps_frames);
            } catch (const std::exception&) {
                fps = 0.0;
            }
            for (std::size_t c = 0; c < nc; ++c) reports[m * nc + c].fps = fps;
        }
    }
    return reports;
}

namespace {

std::string fmt(double v, int precision = 6) {
    if (!std::isfinite(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

}  // namespace

std::string reports_to_csv(const std::vector<EvalReport>& reports, bool include_fps) {
    std::ostringstream out;
    out << "model,filter,light_scale,blur_len,E_c,E_d,E_theta,fn_rate,fps,n\n";
    for (const EvalReport& r : reports) {
        out << r.model << ',' << r.filter << ',' << fmt(r.condition.light_scale, 3) << ',' << r.condition.blur_len
            << ',';
        if (r.failed) {
            out << "nan,nan,nan,nan,";
        } else {
            out << fmt(r.e_c) << ',' << fmt(r.e_d) << ',' << fmt(r.e_theta) << ',' << fmt(r.fn_rate, 4) << ',';
        }
        out << (include_fps ? fmt(r.fps, 1) : std::string()) << ',' << r.n_samples << '\n';
    }
    return out.str();
}

void write_reports_csv(const fs::path& path, const std::vector<EvalReport>& reports, bool include_fps) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    out << reports_to_csv(reports, include_fps);
    if (!out) throw IoError(path.string(), "write failed");
}

namespace {

struct BoxStats {
    double lo, q1, median, q3, hi;
};

double quantile(const std::vector<double>& sorted, double q) {
    double pos = q * static_cast<double>(sorted.size() - 1);
    auto i = static_cast<std::size_t>(std::floor(pos));
    std::size_t j = std::min(i + 1, sorted.size() - 1);
    return sorted[i] + (sorted[j] - sorted[i]) * (pos - static_cast<double>(i));
}

BoxStats box_stats(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return {v.front(), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75), v.back()};
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string condition_label(const Condition& c) {
    std::string s = "N-" + std::to_string(static_cast<int>(std::lround(c.light_scale * 100)));
    if (c.blur_len > 1) s = "Blur " + s;
    return s;
}

std::string svg_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '&') out += "&amp;";
        else if (ch == '<') out += "&lt;";
        else if (ch == '>') out += "&gt;";
        else out += ch;
    }
    return out;
}

// Grouped chart: one group per condition, one slot per model.
void write_chart(const fs::path& path, const std::string& title, const std::vector<EvalReport>& reports,
                 bool box, double EvalReport::*scalar,
                 const std::vector<double> CellErrors::*cells) {
    std::vector<std::string> models, conds;
    for (const EvalReport& r : reports) {
        if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
        std::string c = condition_label(r.condition);
        if (std::find(conds.begin(), conds.end(), c) == conds.end()) conds.push_back(c);
    }
    double ymax = 0.0;
    for (const EvalReport& r : reports) {
        if (r.failed) continue;
        if (box && !(r.cells.*cells).empty())
            ymax = std::max(ymax, *std::max_element((r.cells.*cells).begin(), (r.cells.*cells).end()));
        ymax = std::max(ymax, r.*scalar);
    }
    if (ymax <= 0.0) ymax = 1.0;
    ymax *= 1.1;

    const double left = 60, top = 40, plot_w = 100.0 * std::max<std::size_t>(conds.size(), 1), plot_h = 300;
    const double width = left + plot_w + 160, height = top + plot_h + 60;
    const double group_w = plot_w / std::max<std::size_t>(conds.size(), 1);
    const double slot_w = group_w / (models.size() + 1);
    auto y_of = [&](double v) { return top + plot_h * (1.0 - std::clamp(v / ymax, 0.0, 1.0)); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">" << svg_escape(title) << "</text>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        double v = ymax * t / 4.0;
        svg << "<text x=\"" << left - 5 << "\" y=\"" << y_of(v) + 4 << "\" text-anchor=\"end\">" << fmt(v, 3)
            << "</text>\n";
    }
    for (std::size_t c = 0; c < conds.size(); ++c)
        svg << "<text x=\"" << left + group_w * (c + 0.5) << "\" y=\"" << top + plot_h + 18
            << "\" text-anchor=\"middle\">" << svg_escape(conds[c]) << "</text>\n";

    for (const EvalReport& r : reports) {
        auto m = static_cast<std::size_t>(std::find(models.begin(), models.end(), r.model) - models.begin());
        auto c = static_cast<std::size_t>(std::find(conds.begin(), conds.end(), condition_label(r.condition)) -
                                          conds.begin());
        const char* color = kPalette[m % std::size(kPalette)];
        double x0 = left + group_w * c + slot_w * (m + 0.5), xc = x0 + slot_w / 2;
        if (r.failed) {
            svg << "<text x=\"" << xc << "\" y=\"" << top + plot_h - 4 << "\" text-anchor=\"middle\">x</text>\n";
            continue;
        }
        if (box) {
            const std::vector<double>& v = r.cells.*cells;
            if (v.empty()) continue;
            BoxStats b = box_stats(v);
            svg << "<line x1=\"" << xc << "\" y1=\"" << y_of(b.lo) << "\" x2=\"" << xc << "\" y2=\"" << y_of(b.hi)
                << "\" stroke=\"" << color << "\"/>\n";
            svg << "<rect x=\"" << x0 + 2 << "\" y=\"" << y_of(b.q3) << "\" width=\"" << slot_w - 4
                << "\" height=\"" << std::max(y_of(b.q1) - y_of(b.q3), 0.5) << "\" fill=\"" << color
                << "\" fill-opacity=\"0.35\" stroke=\"" << color << "\"/>\n";
            svg << "<line x1=\"" << x0 + 2 << "\" y1=\"" << y_of(b.median) << "\" x2=\"" << x0 + slot_w - 2
                << "\" y2=\"" << y_of(b.median) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
            svg << "<circle cx=\"" << xc << "\" cy=\"" << y_of(r.*scalar) << "\" r=\"2.5\" fill=\"black\"/>\n";
        } else {
            double y = y_of(r.*scalar);
            svg << "<rect x=\"" << x0 + 2 << "\" y=\"" << y << "\" width=\"" << slot_w - 4 << "\" height=\""
                << top + plot_h - y << "\" fill=\"" << color << "\"/>\n";
        }
    }
    for (std::size_t m = 0; m < models.size(); ++m) {
        double y = top + 10 + 18.0 * m;
        svg << "<rect x=\"" << left + plot_w + 15 << "\" y=\"" << y - 9 << "\" width=\"10\" height=\"10\" fill=\""
            << kPalette[m % std::size(kPalette)] << "\"/>\n";
        svg << "<text x=\"" << left + plot_w + 30 << "\" y=\"" << y << "\">" << svg_escape(models[m]) << "</text>\n";
    }
    svg << "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path.string(), "cannot open for writing");
    out << svg.str();
}

}  // namespace

std::vector<fs::path> write_svg_plots(const fs::path& dir, const std::vector<EvalReport>& reports) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(dir.string(), ec.message());
    std::vector<fs::path> paths{dir / "E_c.svg", dir / "E_d.svg", dir / "E_theta.svg", dir / "fn_rate.svg"};
    write_chart(paths[0], "E_c (normalized, box: per-cell errors, dot: mean)", reports, true,
                &EvalReport::e_c, &CellErrors::center);
    write_chart(paths[1], "E_d [m] (box: per-cell errors, dot: mean)", reports, true, &EvalReport::e_d,
                &CellErrors::distance);
    write_chart(paths[2], "E_theta [rad] (box: per-cell errors, dot: mean)", reports, true,
                &EvalReport::e_theta, &CellErrors::yaw);
    write_chart(paths[3], "False negatives [%]", reports, false, &EvalReport::fn_rate, &CellErrors::center);
    return paths;
}

}  // namespace gateseed::eval
