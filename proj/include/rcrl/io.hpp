#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcrl/online.hpp"

namespace rcrl {

// FNV-1a 64-bit; used to fingerprint environment files (mismatch detection,
// not security).
uint64_t fnv1a64(const std::string& data);
std::string hex64(uint64_t x);

// Shortest-exact decimal rendering of a double (%.17g), stable across runs.
std::string format_double(double x);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);  // throws on failure

// trace.csv: one row per optimizer step.
extern const char* kTraceHeader;  // t,lambda,V_sigma_r_rho,V_sigma_c_rho,grad_mapping_norm,alpha_t,beta_t,b_t
std::string trace_csv(const std::vector<RunRecord>& trace);

// policies.csv: step id followed by the flattened policy logits.
std::string policies_csv(const std::vector<RunRecord>& trace, const std::vector<Mat>& logits);
struct PolicyLog {
    std::vector<int> iterate_ids;
    std::vector<Mat> logits;
};
PolicyLog read_policies_csv(const std::string& text, int n_states, int n_actions);

// eval.csv rows: iterate,method,metric,mean,p5,p95,exact
extern const char* kEvalHeader;
std::string eval_csv(const std::vector<EvalRow>& rows);

// Minimal SVG line chart with shaded percentile bands (fixed 800x500 viewBox,
// 5 ticks per axis); hline draws a horizontal rule (the constraint threshold).
struct SeriesBand {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> mean;
    std::vector<double> lo;
    std::vector<double> hi;
};

std::string render_band_chart(const std::string& title, const std::string& y_label,
                              const std::vector<SeriesBand>& series, std::optional<double> hline);

}  // namespace rcrl
