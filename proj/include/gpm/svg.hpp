#pragma once

#include <algorithm>
#include <cstdio>
#include <string>

#include "gpm/error.hpp"
#include "gpm/evo_game.hpp"

namespace gpm::svg {

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace detail

/// Line chart of x, y, z against t: one polyline per coordinate, axes with
/// numeric ticks and a legend. Output bytes depend only on the input.
inline std::string emit_svg(const game::Trajectory& tr,
                            const std::string& title = "Replicator trajectory") {
  if (tr.t.empty() || tr.t.size() != tr.states.size())
    fail(ErrorKind::domain, "cannot plot an empty trajectory");
  constexpr double W = 800, H = 480, L = 70, R = 130, Tp = 40, B = 50;
  const double pw = W - L - R, ph = H - Tp - B;
  const double t0 = tr.t.front();
  const double t1 = std::max(tr.t.back(), t0 + 1e-12);
  auto px = [&](double t) { return L + (t - t0) / (t1 - t0) * pw; };
  auto py = [&](double v) { return Tp + (1 - v) * ph; };

  std::string s;
  s.reserve(64 * tr.t.size() + 4096);
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"480\" "
       "viewBox=\"0 0 800 480\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"480\" fill=\"white\"/>\n";
  s += "<text x=\"" + detail::num(L + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" "
       "font-size=\"14\">" + title + "</text>\n";

  // Axes.
  s += "<g stroke=\"black\" stroke-width=\"1\">\n";
  s += "<line x1=\"" + detail::num(L) + "\" y1=\"" + detail::num(Tp + ph) + "\" x2=\"" +
       detail::num(L + pw) + "\" y2=\"" + detail::num(Tp + ph) + "\"/>\n";
  s += "<line x1=\"" + detail::num(L) + "\" y1=\"" + detail::num(Tp) + "\" x2=\"" +
       detail::num(L) + "\" y2=\"" + detail::num(Tp + ph) + "\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    const double tv = t0 + (t1 - t0) * i / 5.0;
    s += "<line x1=\"" + detail::num(L - 5) + "\" y1=\"" + detail::num(py(v)) +
         "\" x2=\"" + detail::num(L) + "\" y2=\"" + detail::num(py(v)) + "\"/>\n";
    s += "<line x1=\"" + detail::num(px(tv)) + "\" y1=\"" + detail::num(Tp + ph) +
         "\" x2=\"" + detail::num(px(tv)) + "\" y2=\"" + detail::num(Tp + ph + 5) + "\"/>\n";
  }
  s += "</g>\n<g fill=\"black\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = i / 5.0;
    const double tv = t0 + (t1 - t0) * i / 5.0;
    s += "<text x=\"" + detail::num(L - 8) + "\" y=\"" + detail::num(py(v) + 4) +
         "\" text-anchor=\"end\">" + detail::tick_label(v) + "</text>\n";
    s += "<text x=\"" + detail::num(px(tv)) + "\" y=\"" + detail::num(Tp + ph + 20) +
         "\" text-anchor=\"middle\">" + detail::tick_label(tv) + "</text>\n";
  }
  s += "<text x=\"" + detail::num(L + pw / 2) + "\" y=\"" + detail::num(H - 10) +
       "\" text-anchor=\"middle\">t</text>\n";
  s += "<text x=\"18\" y=\"" + detail::num(Tp + ph / 2) +
       "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       detail::num(Tp + ph / 2) + ")\">probability</text>\n";
  s += "</g>\n";

  const char* names[3] = {"x (Rate1)", "y (Rate2)", "z (Rate3)"};
  const char* colors[3] = {"#d62728", "#1f77b4", "#2ca02c"};
  for (std::size_t k = 0; k < 3; ++k) {
    s += "<polyline id=\"series-" + std::string(1, "xyz"[k]) +
         "\" fill=\"none\" stroke=\"" + colors[k] + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
      if (i) s += ' ';
      s += detail::num(px(tr.t[i]));
      s += ',';
      s += detail::num(py(std::clamp(tr.states[i][k], 0.0, 1.0)));
    }
    s += "\"/>\n";
    const double ly = Tp + 20 + 20 * static_cast<double>(k);
    s += "<line x1=\"" + detail::num(L + pw + 15) + "\" y1=\"" + detail::num(ly) +
         "\" x2=\"" + detail::num(L + pw + 35) + "\" y2=\"" + detail::num(ly) +
         "\" stroke=\"" + colors[k] + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + detail::num(L + pw + 40) + "\" y=\"" + detail::num(ly + 4) +
         "\">" + names[k] + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace gpm::svg
