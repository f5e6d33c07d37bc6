#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace pcb {

std::string beta_case_name(BetaCase c)
{
    switch (c) {
    case BetaCase::beta_gt_1:
        return "beta_gt_1";
    case BetaCase::beta_eq_1:
        return "beta_eq_1";
    case BetaCase::theta_to_0:
        return "theta_to_0";
    }
    return "unknown";
}

std::string format_real(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string curve_csv(const std::vector<CurveRow>& rows)
{
    std::ostringstream os;
    os << "abscissa,s_T,chi_ratio,mean_intensity,beta_case,theta,tau_over_T,d,sigma_m2,r0,rw,k0\n";
    for (const auto& r : rows) {
        os << format_real(r.abscissa) << ',' << format_real(r.s_T) << ',' << format_real(r.chi_ratio) << ','
           << format_real(r.mean_intensity) << ',' << beta_case_name(r.beta_case) << ',' << format_real(r.theta)
           << ',' << format_real(r.tau_over_T) << ',' << r.dim << ',' << format_real(r.sigma_m2) << ','
           << format_real(r.r0) << ',' << format_real(r.rw) << ',' << format_real(r.k0) << '\n';
    }
    return os.str();
}

namespace {

std::string point_text(const Point& p, int dim)
{
    if (dim == 1)
        return format_real(p[0]);
    return format_real(p[0]) + " " + format_real(p[1]);
}

} // namespace

std::string experiment_csv(const ExperimentResult& result, int dim)
{
    std::ostringstream os;
    os << "probe_r,probe_x,probe_t,stat_name,mc_mean,mc_stderr,asymptotic,z_score,n_realizations\n";
    for (const auto& row : result.rows) {
        os << point_text(row.probe.r, dim) << ',' << point_text(row.probe.x, dim) << ','
           << format_real(row.probe.t) << ',' << row.stat << ',' << format_real(row.mc_mean) << ','
           << format_real(row.mc_stderr) << ',' << format_real(row.asymptotic) << ','
           << format_real(row.z_score) << ',' << row.n_realizations << '\n';
    }
    return os.str();
}

namespace {

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '&':
            out += "&amp;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// Up to ~6 round ticks covering [lo, hi].
std::vector<double> linear_ticks(double lo, double hi)
{
    double span = hi - lo;
    double step = std::pow(10.0, std::floor(std::log10(span / 5.0)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (span / (m * step) <= 6.0) {
            step *= m;
            break;
        }
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
        t.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
    return t;
}

std::string tick_label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace

std::string svg_plot(const PlotSpec& plot)
{
    const double width = 640, height = 420, left = 70, right = 180, top = 40, bottom = 55;
    const double pw = width - left - right, ph = height - top - bottom;
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    auto tx = [&](double x) { return plot.log_x ? std::log10(x) : x; };
    for (const auto& s : plot.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i]) || (plot.log_x && !(s.x[i] > 0.0)))
                continue;
            xmin = std::min(xmin, tx(s.x[i]));
            xmax = std::max(xmax, tx(s.x[i]));
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (!(xmin < xmax)) {
        xmin = (std::isfinite(xmin) ? xmin : 0.0) - 1.0;
        xmax = xmin + 2.0;
    }
    ymin = std::min(0.0, std::isfinite(ymin) ? ymin : 0.0);
    ymax = std::isfinite(ymax) ? ymax : 1.0;
    if (!(ymax > ymin))
        ymax = ymin + 1.0;
    ymax += 0.05 * (ymax - ymin);

    auto px = [&](double x) { return left + (tx(x) - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"13\">"
       << escape(plot.title) << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    std::vector<double> xticks;
    if (plot.log_x)
        for (double e = std::ceil(xmin); e <= xmax + 1e-9; e += 1.0)
            xticks.push_back(e);
    else
        xticks = linear_ticks(xmin, xmax);
    for (double t : xticks) {
        double x = left + (t - xmin) / (xmax - xmin) * pw;
        os << "<line x1=\"" << num(x) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(x) << "\" y2=\""
           << num(top + ph + 5) << "\" stroke=\"black\"/>\n";
        std::string label = plot.log_x ? "1e" + tick_label(t) : tick_label(t);
        os << "<text x=\"" << num(x) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">" << label
           << "</text>\n";
    }
    for (double t : linear_ticks(ymin, ymax)) {
        double y = py(t);
        os << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left) << "\" y2=\""
           << num(y) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << num(left - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
           << tick_label(t) << "</text>\n";
    }
    os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 12) << "\" text-anchor=\"middle\">"
       << escape(plot.x_label) << "</text>\n";
    os << "<text transform=\"translate(18," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
       << escape(plot.y_label) << "</text>\n";

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const auto& s = plot.series[k];
        const char* color = colors[k % 6];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i]) || (plot.log_x && !(s.x[i] > 0.0)))
                continue;
            os << (first ? "" : " ") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
            first = false;
        }
        os << "\"/>\n";
        double ly = top + 14 + 18 * double(k);
        os << "<line x1=\"" << num(left + pw + 10) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + pw + 30)
           << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << num(left + pw + 35) << "\" y=\"" << num(ly + 4) << "\" font-size=\"10\">"
           << escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void require_writable(const std::string& path)
{
    if (path.empty())
        config_error("an output path is required (--out)");
    std::filesystem::path p(path);
    std::filesystem::path dir = p.parent_path();
    if (dir.empty())
        dir = ".";
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec))
        config_error("output directory '" + dir.string() + "' does not exist");
    if (::access(dir.c_str(), W_OK) != 0)
        config_error("output directory '" + dir.string() + "' is not writable");
    if (std::filesystem::is_directory(p, ec))
        config_error("output path '" + path + "' is a directory");
}

void write_text_file(const std::string& path, const std::string& body)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        config_error("cannot open '" + path + "' for writing");
    out << body;
    if (!out)
        config_error("failed writing '" + path + "'");
}

std::string sibling_path(const std::string& path, const std::string& ext)
{
    std::filesystem::path p(path);
    p.replace_extension(ext);
    return p.string();
}

} // namespace pcb
