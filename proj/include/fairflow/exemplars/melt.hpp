#pragma once

// Analytic surrogate for a solid-liquid coexistence melting-point workflow.
//
// The molecular-dynamics engine is replaced by a closed-form relaxation model
// with deterministic pseudo-noise, but the published analysis rules are
// applied verbatim:
//   * coexistence     <=> final solid AND liquid fractions within [0.35, 0.65]
//                         (inclusive at both ends);
//   * steady_state    <=> |least-squares slope of T(t) over the final 20 ps|
//                         <= 10 K/ps (inclusive);
//   * melting_temperature = mean temperature over the final 20 ps;
//   * confidence_95   = 1.96 * sigma / sqrt(n) over that window.
//
// Everything is a pure function of the canonical inputs: the pseudo-noise
// generator is seeded from a digest of the inputs bytes, so equal canonical
// inputs always reproduce byte-identical outputs.

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fairflow/errors.hpp"
#include "fairflow/sha256.hpp"

namespace fairflow::melt {

struct MeltConditions {
  double melt_point_k = 0.0;  // curated material melting point T_m
  double t_solid_k = 0.0;
  double t_liquid_k = 0.0;
  double run_time_fs = 50000.0;
  double noise_k = 5.0;  // 1-sigma amplitude of the pseudo-noise
};

struct Trace {
  std::vector<double> t_fs;
  std::vector<double> temp_k;
};

inline uint64_t seed_from_bytes(const std::string& bytes) {
  std::string hex = sha256_hex(bytes);
  uint64_t seed = 0;
  for (int i = 0; i < 16; ++i) {
    char c = hex[static_cast<size_t>(i)];
    seed = (seed << 4) | static_cast<uint64_t>(c <= '9' ? c - '0' : c - 'a' + 10);
  }
  return seed;
}

// 501 evenly spaced samples of T(t) = T_f + (T0 - T_f) e^{-t/tau} with
// Gaussian pseudo-noise. T0 is the midpoint of the two thermostat settings;
// the trace relaxes toward the material's melting point with a small residual
// offset, mimicking a two-phase system settling onto its coexistence plateau.
inline Trace synth_trace(const MeltConditions& c, uint64_t seed) {
  constexpr int kSamples = 501;
  const double t0 = 0.5 * (c.t_solid_k + c.t_liquid_k);
  const double t_final = c.melt_point_k + 0.1 * (t0 - c.melt_point_k);
  const double tau = c.run_time_fs / 5.0;
  const double dt = c.run_time_fs / (kSamples - 1);

  std::mt19937_64 rng(seed);
  auto uniform01 = [&rng]() {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
  };

  Trace trace;
  trace.t_fs.reserve(kSamples);
  trace.temp_k.reserve(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    double t = dt * i;
    double u1 = uniform01();
    double u2 = uniform01();
    double gauss = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    trace.t_fs.push_back(t);
    trace.temp_k.push_back(t_final + (t0 - t_final) * std::exp(-t / tau) + c.noise_k * gauss);
  }
  return trace;
}

struct TraceAnalysis {
  double melting_temperature_k = 0.0;  // mean over the window
  double confidence_95_k = 0.0;        // 1.96 * sigma / sqrt(n)
  double slope_k_per_ps = 0.0;         // least-squares slope over the window
  bool steady_state = false;
  size_t window_samples = 0;
};

// Applies the temperature rules over the trailing `window_fs` of the trace
// (default 20 ps). The slope is computed on a picosecond time base so that
// exact-integer test traces stay exact.
inline TraceAnalysis analyze_trace(const Trace& trace, double window_fs = 20000.0) {
  if (trace.t_fs.empty() || trace.t_fs.size() != trace.temp_k.size())
    throw Error(Errc::schema_error, "trace must have matching, non-empty t and T arrays");
  const double t_end = trace.t_fs.back();
  const double cutoff = t_end - window_fs;

  std::vector<double> t_ps, temp;
  for (size_t i = 0; i < trace.t_fs.size(); ++i) {
    if (trace.t_fs[i] + 1e-9 >= cutoff) {
      t_ps.push_back(trace.t_fs[i] / 1000.0);
      temp.push_back(trace.temp_k[i]);
    }
  }

  TraceAnalysis a;
  a.window_samples = t_ps.size();
  const double n = static_cast<double>(t_ps.size());
  double mean_t = 0.0, mean_temp = 0.0;
  for (size_t i = 0; i < t_ps.size(); ++i) {
    mean_t += t_ps[i];
    mean_temp += temp[i];
  }
  mean_t /= n;
  mean_temp /= n;
  a.melting_temperature_k = mean_temp;

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < t_ps.size(); ++i) {
    double dx = t_ps[i] - mean_t;
    double dy = temp[i] - mean_temp;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  a.slope_k_per_ps = (sxx > 0.0) ? sxy / sxx : 0.0;
  a.steady_state = std::fabs(a.slope_k_per_ps) <= 10.0;  // inclusive at 10 K/ps

  double variance = (t_ps.size() > 1) ? syy / (n - 1.0) : 0.0;
  a.confidence_95_k = 1.96 * std::sqrt(variance) / std::sqrt(n);
  return a;
}

struct PhaseFractions {
  double solid = 0.0;
  double liquid = 0.0;
  double other = 0.0;
};

// Final-state classification: a logistic competition between the plateau
// temperature and the material's melting point, with a fixed 2% of atoms
// left unclassified (the structure-matching "other" bucket).
inline PhaseFractions phase_fractions(double plateau_k, const MeltConditions& c) {
  double width = std::max((c.t_liquid_k - c.t_solid_k) / 8.0, 1.0);
  double solid_share = 1.0 / (1.0 + std::exp((plateau_k - c.melt_point_k) / width));
  PhaseFractions f;
  f.other = 0.02;
  f.solid = solid_share * (1.0 - f.other);
  f.liquid = (1.0 - f.other) - f.solid;
  return f;
}

// The published coexistence band, inclusive at both edges for both phases.
inline bool coexistence_rule(double solid_fraction, double liquid_fraction) {
  return solid_fraction >= 0.35 && solid_fraction <= 0.65 && liquid_fraction >= 0.35 &&
         liquid_fraction <= 0.65;
}

// ---------------------------------------------------------------------------
// Minimal PNG writer (RGB8, zlib-compressed) for the snapshot output.
// ---------------------------------------------------------------------------

namespace png_detail {

inline void put_be32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

inline void put_chunk(std::string& out, const char type[4], const std::string& data) {
  put_be32(out, static_cast<uint32_t>(data.size()));
  std::string payload(type, 4);
  payload += data;
  out += payload;
  uLong crc = ::crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
                      static_cast<uInt>(payload.size()));
  put_be32(out, static_cast<uint32_t>(crc));
}

}  // namespace png_detail

// Encodes an 8-bit RGB buffer (row-major, 3 bytes per pixel) as a PNG file
// image. Deterministic: fixed filter (none) and compression level.
inline std::string encode_png(int width, int height, const std::vector<uint8_t>& rgb) {
  if (width <= 0 || height <= 0 ||
      rgb.size() != static_cast<size_t>(width) * static_cast<size_t>(height) * 3)
    throw Error(Errc::schema_error, "rgb buffer does not match image dimensions");

  std::string raw;
  raw.reserve(static_cast<size_t>(height) * (1 + static_cast<size_t>(width) * 3));
  for (int y = 0; y < height; ++y) {
    raw.push_back('\0');  // filter type 0 per scanline
    raw.append(reinterpret_cast<const char*>(&rgb[static_cast<size_t>(y) * width * 3]),
               static_cast<size_t>(width) * 3);
  }
  uLongf bound = ::compressBound(static_cast<uLong>(raw.size()));
  std::string compressed(bound, '\0');
  if (::compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                  reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                  6) != Z_OK)
    throw Error(Errc::io_error, "zlib compression failed while encoding PNG");
  compressed.resize(bound);

  std::string out("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  png_detail::put_be32(ihdr, static_cast<uint32_t>(width));
  png_detail::put_be32(ihdr, static_cast<uint32_t>(height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type: truecolor RGB
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  png_detail::put_chunk(out, "IHDR", ihdr);
  png_detail::put_chunk(out, "IDAT", compressed);
  png_detail::put_chunk(out, "IEND", "");
  return out;
}

// Renders the snapshot: temperature trace as a polyline over a background
// split by the final phase fractions (solid band below, liquid band above).
inline std::string render_snapshot(const Trace& trace, const PhaseFractions& fractions) {
  constexpr int kW = 320, kH = 240;
  std::vector<uint8_t> rgb(static_cast<size_t>(kW) * kH * 3);

  int solid_rows = static_cast<int>(fractions.solid * kH);
  for (int y = 0; y < kH; ++y) {
    bool solid_band = (kH - 1 - y) < solid_rows;  // solid fraction from the bottom
    uint8_t r = solid_band ? 58 : 170;
    uint8_t g = solid_band ? 90 : 96;
    uint8_t b = solid_band ? 160 : 60;
    for (int x = 0; x < kW; ++x) {
      size_t at = (static_cast<size_t>(y) * kW + x) * 3;
      rgb[at] = r;
      rgb[at + 1] = g;
      rgb[at + 2] = b;
    }
  }

  double lo = trace.temp_k.front(), hi = lo;
  for (double v : trace.temp_k) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (hi - lo < 1.0) hi = lo + 1.0;
  for (int x = 0; x < kW; ++x) {
    size_t i = static_cast<size_t>(
        (static_cast<double>(x) / (kW - 1)) * (trace.temp_k.size() - 1) + 0.5);
    double frac = (trace.temp_k[i] - lo) / (hi - lo);
    int y = kH - 1 - static_cast<int>(frac * (kH - 1));
    for (int dy = -1; dy <= 1; ++dy) {
      int yy = y + dy;
      if (yy < 0 || yy >= kH) continue;
      size_t at = (static_cast<size_t>(yy) * kW + x) * 3;
      rgb[at] = 255;
      rgb[at + 1] = 230;
      rgb[at + 2] = 120;
    }
  }
  return encode_png(kW, kH, rgb);
}

}  // namespace fairflow::melt
