#include "vaporsim/runio.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vaporsim/errors.hpp"

namespace vaporsim {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_plot(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
  if (!out) throw ConfigError("write failed: " + path);
}

std::string csv_text(const HeaderLines& header,
                     const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (const auto& [key, value] : header) {
    out << "# " << key << ": " << value << "\n";
  }
  out << "# columns: ";
  for (size_t i = 0; i < columns.size(); ++i) {
    out << (i ? "," : "") << columns[i];
  }
  out << "\n";
  for (const std::vector<double>& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << format_plot(row[i]);
    }
    out << "\n";
  }
  return out.str();
}

std::string trace_text(const SpectrumTrace& trace, const HeaderLines& header) {
  trace.validate();
  std::ostringstream out;
  out << "# vaporsim spectrum trace\n";
  for (const auto& [key, value] : header) {
    out << "# " << key << ": " << value << "\n";
  }
  if (trace.noise_sigma > 0.0) {
    out << "# noise_sigma: " << format_full(trace.noise_sigma) << "\n";
  }
  out << "# columns: frequency_GHz transmission\n";
  for (size_t i = 0; i < trace.frequency_ghz.size(); ++i) {
    out << format_full(trace.frequency_ghz[i]) << " "
        << format_full(trace.transmission[i]) << "\n";
  }
  return out.str();
}

SpectrumTrace parse_trace_text(const std::string& text,
                               const std::string& origin) {
  SpectrumTrace trace;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      const std::string tag = "noise_sigma:";
      if (const auto pos = line.find(tag); pos != std::string::npos) {
        trace.noise_sigma = std::stod(line.substr(pos + tag.size()));
      }
      continue;
    }
    std::istringstream row(line);
    double nu = 0.0, t = 0.0;
    if (!(row >> nu >> t)) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected two numeric columns");
    }
    trace.frequency_ghz.push_back(nu);
    trace.transmission.push_back(t);
  }
  if (trace.frequency_ghz.empty()) {
    throw ConfigError(origin + ": no data rows");
  }
  return trace;
}

SpectrumTrace read_trace_file(const std::string& path) {
  return parse_trace_text(read_text_file(path), path);
}

void write_image_series(const std::string& dir, const ImageSeries& series,
                        const HeaderLines& annotations) {
  series.validate();
  fs::create_directories(dir);
  json manifest;
  manifest["schema_version"] = 1;
  manifest["kind"] = "image_series";
  manifest["nx"] = series.nx;
  manifest["ny"] = series.ny;
  manifest["pixel_pitch_mm"] = series.pixel_pitch_mm;
  manifest["timestamps_ms"] = series.timestamps_ms;
  json notes = json::object();
  for (const auto& [key, value] : annotations) notes[key] = value;
  manifest["annotations"] = notes;

  std::vector<std::string> names;
  for (size_t t = 0; t < series.frames.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04zu.txt", t);
    names.push_back(name);
    std::ostringstream body;
    for (int iy = 0; iy < series.ny; ++iy) {
      for (int ix = 0; ix < series.nx; ++ix) {
        body << (ix ? " " : "")
             << format_full(series.frames[t][size_t(iy) * series.nx + ix]);
      }
      body << "\n";
    }
    write_text_file((fs::path(dir) / name).string(), body.str());
  }
  manifest["frames"] = names;
  write_text_file((fs::path(dir) / "series.json").string(),
                  manifest.dump(2) + "\n");
}

ImageSeries read_image_series(const std::string& path) {
  fs::path manifest_path(path);
  if (fs::is_directory(manifest_path)) manifest_path /= "series.json";
  const std::string text = read_text_file(manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(manifest_path.string() + ": " + e.what());
  }
  ImageSeries series;
  try {
    series.nx = manifest.at("nx").get<int>();
    series.ny = manifest.at("ny").get<int>();
    series.pixel_pitch_mm = manifest.at("pixel_pitch_mm").get<double>();
    series.timestamps_ms =
        manifest.at("timestamps_ms").get<std::vector<double>>();
    const auto names = manifest.at("frames").get<std::vector<std::string>>();
    const fs::path dir = manifest_path.parent_path();
    for (const std::string& name : names) {
      const std::string body = read_text_file((dir / name).string());
      std::istringstream in(body);
      std::vector<double> frame;
      double v = 0.0;
      while (in >> v) frame.push_back(v);
      series.frames.push_back(std::move(frame));
    }
  } catch (const json::exception& e) {
    throw ConfigError(manifest_path.string() + ": " + e.what());
  }
  try {
    series.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(manifest_path.string() + ": " + e.what());
  }
  return series;
}

}  // namespace vaporsim
