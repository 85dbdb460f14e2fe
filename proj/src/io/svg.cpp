#include <algorithm>
#include <cmath>
#include <sstream>

#include "pals/io/formats.hpp"
#include "pals/solver/reconstruct.hpp"

namespace pals {

std::string trace_to_svg(const OptimizationTrace& trace) {
  constexpr double kW = 640.0, kH = 400.0, kLeft = 70.0, kRight = 20.0, kTop = 20.0, kBottom = 50.0;
  std::vector<double> y;
  for (const TraceRecord& r : trace.records) y.push_back(std::log10(std::max(r.misfit, 1e-300)));
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (!y.empty()) {
    double lo = std::floor(*std::min_element(y.begin(), y.end()));
    double hi = std::ceil(*std::max_element(y.begin(), y.end()));
    if (hi <= lo) hi = lo + 1.0;
    const double nx = std::max<double>(1.0, static_cast<double>(y.size() - 1));
    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double px = kLeft + pw * static_cast<double>(i) / nx;
      const double py = kTop + ph * (hi - y[i]) / (hi - lo);
      os << px << ',' << py << ' ';
    }
    os << "\"/>\n";
    for (double d = lo; d <= hi + 0.5; d += 1.0) {
      const double py = kTop + ph * (hi - d) / (hi - lo);
      os << "<text x=\"" << kLeft - 8 << "\" y=\"" << py + 4 << "\" font-size=\"12\" text-anchor=\"end\">1e"
         << static_cast<int>(d) << "</text>\n";
    }
    os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 15
       << "\" font-size=\"13\" text-anchor=\"middle\">GN iteration (" << y.size() - 1 << ")</text>\n";
  }
  os << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << kTop + ph / 2 << ")\">data misfit</text>\n";
  os << "</svg>\n";
  return os.str();
}

}  // namespace pals
