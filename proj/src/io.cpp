#include "rcrl/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rcrl {

uint64_t fnv1a64(const std::string& data) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(uint64_t x) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* kTraceHeader = "t,lambda,V_sigma_r_rho,V_sigma_c_rho,grad_mapping_norm,alpha_t,beta_t,b_t";
const char* kEvalHeader = "iterate,method,metric,mean,p5,p95,exact";

std::string trace_csv(const std::vector<RunRecord>& trace) {
    std::ostringstream out;
    out << kTraceHeader << "\n";
    for (const RunRecord& r : trace)
        out << r.t << ',' << format_double(r.lambda) << ',' << format_double(r.v_sigma_r_rho) << ','
            << format_double(r.v_sigma_c_rho) << ',' << format_double(r.grad_mapping_norm) << ','
            << format_double(r.alpha_t) << ',' << format_double(r.beta_t) << ','
            << format_double(r.b_t) << "\n";
    return out.str();
}

std::string policies_csv(const std::vector<RunRecord>& trace, const std::vector<Mat>& logits) {
    if (trace.size() != logits.size())
        throw std::invalid_argument("policies_csv: trace/logits length mismatch");
    std::ostringstream out;
    out << "t";
    if (!logits.empty())
        for (size_t i = 0; i < logits[0].a.size(); ++i) out << ",th_" << i;
    out << "\n";
    for (size_t i = 0; i < trace.size(); ++i) {
        out << trace[i].t;
        for (double x : logits[i].a) out << ',' << format_double(x);
        out << "\n";
    }
    return out.str();
}

PolicyLog read_policies_csv(const std::string& text, int n_states, int n_actions) {
    PolicyLog log;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);  // header
    const size_t want = static_cast<size_t>(n_states) * n_actions;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::getline(row, cell, ',');
        Mat theta(n_states, n_actions);
        size_t k = 0;
        int id = std::stoi(cell);
        while (std::getline(row, cell, ',')) {
            if (k >= want) throw std::runtime_error("policies.csv row too long");
            theta.a[k++] = std::stod(cell);
        }
        if (k != want) throw std::runtime_error("policies.csv row too short");
        log.iterate_ids.push_back(id);
        log.logits.push_back(std::move(theta));
    }
    return log;
}

std::string eval_csv(const std::vector<EvalRow>& rows) {
    std::ostringstream out;
    out << kEvalHeader << "\n";
    for (const EvalRow& r : rows)
        out << r.iterate << ',' << r.method << ',' << r.metric << ',' << format_double(r.mean) << ','
            << format_double(r.p5) << ',' << format_double(r.p95) << ',' << format_double(r.exact)
            << "\n";
    return out.str();
}

namespace {

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace

std::string render_band_chart(const std::string& title, const std::string& y_label,
                              const std::vector<SeriesBand>& series, std::optional<double> hline) {
    const double width = 800, height = 500;
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& s : series) {
        for (double v : s.x) { x_min = std::min(x_min, v); x_max = std::max(x_max, v); }
        for (double v : s.lo) y_min = std::min(y_min, v);
        for (double v : s.hi) y_max = std::max(y_max, v);
        for (double v : s.mean) { y_min = std::min(y_min, v); y_max = std::max(y_max, v); }
    }
    if (hline) { y_min = std::min(y_min, *hline); y_max = std::max(y_max, *hline); }
    if (!(x_max > x_min)) { x_min -= 0.5; x_max += 0.5; }
    if (!(y_max > y_min)) { y_min -= 0.5; y_max += 0.5; }
    double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    auto px = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - y_min) / (y_max - y_min) * (height - mt - mb); };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" "
           "font-family=\"sans-serif\" font-size=\"13\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
    out << "<text x=\"400\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">" << title << "</text>\n";
    out << "<text x=\"16\" y=\"250\" text-anchor=\"middle\" transform=\"rotate(-90 16 250)\">"
        << y_label << "</text>\n";
    out << "<text x=\"435\" y=\"492\" text-anchor=\"middle\">iteration</text>\n";

    for (int i = 0; i < 5; ++i) {
        double fx = x_min + (x_max - x_min) * i / 4.0;
        double fy = y_min + (y_max - y_min) * i / 4.0;
        out << "<line x1=\"" << px(fx) << "\" y1=\"" << height - mb << "\" x2=\"" << px(fx)
            << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px(fx) << "\" y=\"" << height - mb + 20
            << "\" text-anchor=\"middle\">" << tick_label(fx) << "</text>\n";
        out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << ml << "\" y2=\""
            << py(fy) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << ml - 9 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\">" << tick_label(fy) << "</text>\n";
    }
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << height - mb
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
        << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";

    for (const auto& s : series) {
        if (s.x.empty()) continue;
        out << "<polygon fill=\"" << s.color << "\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i) out << px(s.x[i]) << ',' << py(s.hi[i]) << ' ';
        for (size_t i = s.x.size(); i-- > 0;) out << px(s.x[i]) << ',' << py(s.lo[i]) << ' ';
        out << "\"/>\n";
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i) out << px(s.x[i]) << ',' << py(s.mean[i]) << ' ';
        out << "\"/>\n";
    }
    if (hline) {
        out << "<line x1=\"" << ml << "\" y1=\"" << py(*hline) << "\" x2=\"" << width - mr
            << "\" y2=\"" << py(*hline)
            << "\" stroke=\"black\" stroke-dasharray=\"6,4\" stroke-width=\"1.5\"/>\n";
        out << "<text x=\"" << width - mr - 4 << "\" y=\"" << py(*hline) - 5
            << "\" text-anchor=\"end\">b</text>\n";
    }
    double ly = mt + 8;
    for (const auto& s : series) {
        out << "<rect x=\"" << ml + 12 << "\" y=\"" << ly - 9 << "\" width=\"18\" height=\"10\" fill=\""
            << s.color << "\"/>\n";
        out << "<text x=\"" << ml + 36 << "\" y=\"" << ly << "\">" << s.label << "</text>\n";
        ly += 18;
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace rcrl
