#pragma once

// File formats:
//   LineSpectrum  JSON  {"lines": [{"omega": f, "re": f, "im": f}, ...]}
//   SampleRecord  CSV   header "t,re,im" or "t,re,im,dre,dim"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "prolate/signal.hpp"

namespace prolate {

inline nlohmann::json to_json(const LineSpectrum& spec) {
  nlohmann::json lines = nlohmann::json::array();
  for (const auto& l : spec.lines()) lines.push_back({{"omega", l.omega}, {"re", l.alpha.real()}, {"im", l.alpha.imag()}});
  return {{"lines", lines}};
}

inline LineSpectrum line_spectrum_from_json(const nlohmann::json& j) {
  if (!j.contains("lines") || !j["lines"].is_array()) throw std::invalid_argument("spectrum JSON: missing \"lines\" array");
  std::vector<Line> lines;
  for (const auto& e : j["lines"]) {
    Line l;
    l.omega = e.at("omega").get<double>();
    l.alpha = {e.value("re", 0.0), e.value("im", 0.0)};
    lines.push_back(l);
  }
  return LineSpectrum(std::move(lines));
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(in);
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_samples_csv(std::ostream& out, const SampleRecord& rec) {
  rec.validate();
  const bool deriv = rec.derivative_values.has_value();
  out << (deriv ? "t,re,im,dre,dim\n" : "t,re,im\n");
  for (std::size_t j = 0; j < rec.size(); ++j) {
    out << format_double(rec.times[j]) << ',' << format_double(rec.values[j].real()) << ','
        << format_double(rec.values[j].imag());
    if (deriv)
      out << ',' << format_double((*rec.derivative_values)[j].real()) << ','
          << format_double((*rec.derivative_values)[j].imag());
    out << '\n';
  }
}

inline void write_samples_csv(const std::string& path, const SampleRecord& rec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_samples_csv(out, rec);
}

/// Noise metadata is not part of the CSV; the returned record carries NoNoise.
inline SampleRecord read_samples_csv(std::istream& in) {
  SampleRecord rec;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("samples CSV: empty input");
  bool deriv = false;
  if (line.rfind("t,re,im,dre,dim", 0) == 0)
    deriv = true;
  else if (line.rfind("t,re,im", 0) != 0)
    throw std::invalid_argument("samples CSV: expected header t,re,im[,dre,dim]");
  std::vector<cplx> d;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cols;
    while (std::getline(ss, cell, ',')) cols.push_back(std::stod(cell));
    if (cols.size() != (deriv ? 5u : 3u)) throw std::invalid_argument("samples CSV: wrong column count: " + line);
    rec.times.push_back(cols[0]);
    rec.values.emplace_back(cols[1], cols[2]);
    if (deriv) d.emplace_back(cols[3], cols[4]);
  }
  if (deriv) rec.derivative_values = std::move(d);
  rec.validate();
  return rec;
}

inline SampleRecord read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_samples_csv(in);
}

}  // namespace prolate
