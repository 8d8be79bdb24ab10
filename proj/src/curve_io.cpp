#include "number_text.hpp"
#include "tissuefit/errors.hpp"
#include "tissuefit/scenario.hpp"

#include <fstream>
#include <istream>
#include <ostream>

namespace tissuefit {

ForceDisplacementCurve parse_curve_csv(std::istream& in) {
  ForceDisplacementCurve curve;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty() || line.front() == '#' || line == "\r") continue;
    const auto fields = detail::split_fields(line);
    if (fields.empty()) continue;
    if (!header_seen) {
      if (fields.size() != 2 || fields[0] != "displacement_m" || fields[1] != "force_N") {
        throw ParseError(line_no, "expected header 'displacement_m,force_N'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 2) throw ParseError(line_no, "expected two columns");
    const auto d = detail::parse_double(fields[0]);
    const auto f = detail::parse_double(fields[1]);
    if (!d || !f || !std::isfinite(*d) || !std::isfinite(*f)) {
      throw ParseError(line_no, "malformed number in '" + std::string(line) + "'");
    }
    curve.displacement.push_back(*d);
    curve.force.push_back(*f);
  }
  if (!header_seen) throw ParseError(0, "curve file is empty (no header)");
  if (curve.empty()) throw ParseError(0, "curve file has no samples");
  return curve;
}

ForceDisplacementCurve read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open curve file '" + path + "'");
  try {
    return parse_curve_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
}

void write_curve_csv(const ForceDisplacementCurve& curve, std::ostream& out,
                     const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "displacement_m,force_N\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << detail::format_double(curve.displacement[i]) << ',' << detail::format_double(curve.force[i]) << '\n';
  }
}

void write_curve_csv(const ForceDisplacementCurve& curve, const std::string& path,
                     const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write curve file '" + path + "'");
  write_curve_csv(curve, out, comments);
}

}  // namespace tissuefit
