#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vaporsim/diffusion.hpp"
#include "vaporsim/spectrofit.hpp"

namespace vaporsim {

// Numeric formatting for output files: full round-trips a double exactly,
// plot is the shorter form used in derived tables.
std::string format_full(double v);
std::string format_plot(double v);

using HeaderLines = std::vector<std::pair<std::string, std::string>>;

// Throws ConfigError when the file cannot be read.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// CSV with '#'-prefixed metadata lines, a '# columns:' line, then
// comma-separated rows.
std::string csv_text(const HeaderLines& header,
                     const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows);

// Two-column scan file (frequency_GHz, transmission) with '#' metadata
// header; noise_sigma is carried in the header when nonzero.
std::string trace_text(const SpectrumTrace& trace, const HeaderLines& header);
SpectrumTrace parse_trace_text(const std::string& text,
                               const std::string& origin);
SpectrumTrace read_trace_file(const std::string& path);

// Image series as a directory of per-frame text matrices plus a
// series.json manifest (nx, ny, pixel_pitch_mm, timestamps_ms, frame file
// names, free-form string annotations).
void write_image_series(const std::string& dir, const ImageSeries& series,
                        const HeaderLines& annotations);
ImageSeries read_image_series(const std::string& path);  // dir or manifest

}  // namespace vaporsim
