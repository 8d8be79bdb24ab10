#include "number_text.hpp"
#include "tissuefit/errors.hpp"
#include "tissuefit/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tissuefit {
namespace {

enum class Section { none, nodes, elements, nset, elset };

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::size_t parse_index(std::string_view field, std::size_t line, const char* what) {
  const auto v = detail::parse_integer(field);
  if (!v || *v < 1) {
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(field) + "'");
  }
  return static_cast<std::size_t>(*v);
}

struct SetEntry {
  std::vector<std::size_t> members;  // 1-based as read
  std::vector<std::size_t> lines;
};

}  // namespace

HexMesh parse_mesh(std::istream& in) {
  std::vector<Vec3> nodes;
  std::vector<HexConnectivity> elements;
  std::vector<std::size_t> element_lines;
  std::map<std::string, SetEntry> nsets;
  std::map<std::string, SetEntry> elsets;

  Section section = Section::none;
  SetEntry* current_set = nullptr;
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::strip_comment(raw);
    const auto fields = detail::split_fields(line);
    if (fields.empty()) continue;

    if (fields[0].front() == '*') {
      const std::string key = upper(fields[0]);
      if (key == "*NODES" || key == "*ELEMENTS") {
        if (fields.size() != 1) throw ParseError(line_no, key + " takes no arguments");
        section = key == "*NODES" ? Section::nodes : Section::elements;
        current_set = nullptr;
      } else if (key == "*NSET" || key == "*ELSET") {
        if (fields.size() != 2) throw ParseError(line_no, key + " requires exactly one set name");
        auto& table = key == "*NSET" ? nsets : elsets;
        const std::string name(fields[1]);
        if (table.count(name)) throw ParseError(line_no, "duplicate set '" + name + "'");
        current_set = &table[name];
        section = key == "*NSET" ? Section::nset : Section::elset;
      } else {
        throw ParseError(line_no, "unknown section '" + std::string(fields[0]) + "'");
      }
      continue;
    }

    switch (section) {
      case Section::none:
        throw ParseError(line_no, "data before any section header");
      case Section::nodes: {
        if (fields.size() != 4) throw ParseError(line_no, "node line needs: index x y z");
        const std::size_t idx = parse_index(fields[0], line_no, "node index");
        if (idx != nodes.size() + 1) {
          throw ParseError(line_no, "node index " + std::to_string(idx) + " out of sequence (expected " +
                                        std::to_string(nodes.size() + 1) + ")");
        }
        Vec3 x;
        for (int d = 0; d < 3; ++d) {
          const auto v = detail::parse_double(fields[1 + d]);
          if (!v || !std::isfinite(*v)) {
            throw ParseError(line_no, "node " + std::to_string(idx) + ": invalid coordinate '" +
                                          std::string(fields[1 + d]) + "'");
          }
          x[d] = *v;
        }
        nodes.push_back(x);
        break;
      }
      case Section::elements: {
        if (fields.size() != 9) throw ParseError(line_no, "element line needs: index n1 .. n8");
        const std::size_t idx = parse_index(fields[0], line_no, "element index");
        if (idx != elements.size() + 1) {
          throw ParseError(line_no, "element index " + std::to_string(idx) +
                                        " out of sequence (expected " +
                                        std::to_string(elements.size() + 1) + ")");
        }
        HexConnectivity conn;
        for (int a = 0; a < 8; ++a) conn[a] = parse_index(fields[1 + a], line_no, "node reference") - 1;
        elements.push_back(conn);
        element_lines.push_back(line_no);
        break;
      }
      case Section::nset:
      case Section::elset:
        for (auto f : fields) {
          current_set->members.push_back(parse_index(f, line_no, "set member"));
          current_set->lines.push_back(line_no);
        }
        break;
    }
  }

  for (std::size_t e = 0; e < elements.size(); ++e) {
    const auto& conn = elements[e];
    for (int a = 0; a < 8; ++a) {
      if (conn[a] >= nodes.size()) {
        throw ParseError(element_lines[e], "element " + std::to_string(e + 1) + " references node " +
                                               std::to_string(conn[a] + 1) + " beyond node count " +
                                               std::to_string(nodes.size()));
      }
      for (int b = 0; b < a; ++b) {
        if (conn[a] == conn[b]) {
          throw ParseError(element_lines[e], "element " + std::to_string(e + 1) + " repeats node " +
                                                 std::to_string(conn[a] + 1));
        }
      }
    }
    ElementCoords x;
    for (int a = 0; a < 8; ++a) x[a] = nodes[conn[a]];
    const auto sj = scaled_jacobian(x);
    const double lo = *std::min_element(sj.corner.begin(), sj.corner.end());
    if (sj.degenerate || !(lo > 0.0)) {
      throw ParseError(element_lines[e], "element " + std::to_string(e + 1) +
                                             " is not right-handed (minimum corner scaled Jacobian " +
                                             std::to_string(lo) + ")");
    }
  }

  const auto convert = [](std::map<std::string, SetEntry>& table, std::size_t limit,
                          const char* kind) {
    IndexSets out;
    for (auto& [name, entry] : table) {
      auto& dst = out[name];
      dst.reserve(entry.members.size());
      for (std::size_t i = 0; i < entry.members.size(); ++i) {
        if (entry.members[i] > limit) {
          throw ParseError(entry.lines[i], std::string(kind) + " set '" + name + "' references " +
                                               kind + " " + std::to_string(entry.members[i]) +
                                               " beyond count " + std::to_string(limit));
        }
        dst.push_back(entry.members[i] - 1);
      }
    }
    return out;
  };
  IndexSets node_sets = convert(nsets, nodes.size(), "node");
  IndexSets element_sets = convert(elsets, elements.size(), "element");

  return HexMesh(std::move(nodes), std::move(elements), std::move(node_sets), std::move(element_sets));
}

HexMesh parse_mesh_string(const std::string& text) {
  std::istringstream in(text);
  return parse_mesh(in);
}

void serialize_mesh(const HexMesh& mesh, std::ostream& out) {
  out << "# tissuefit hexahedral mesh, coordinates in meters, 1-based indices\n";
  out << "*NODES\n";
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    const auto& x = mesh.node(i);
    out << i + 1 << ' ' << detail::format_double(x[0]) << ' ' << detail::format_double(x[1]) << ' '
        << detail::format_double(x[2]) << '\n';
  }
  out << "*ELEMENTS\n";
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    out << e + 1;
    for (std::size_t n : mesh.element(e)) out << ' ' << n + 1;
    out << '\n';
  }
  const auto write_sets = [&](const IndexSets& sets, const char* header) {
    for (const auto& [name, members] : sets) {
      out << header << ' ' << name << '\n';
      for (std::size_t i = 0; i < members.size(); ++i) {
        out << members[i] + 1 << ((i % 16 == 15 || i + 1 == members.size()) ? '\n' : ' ');
      }
    }
  };
  write_sets(mesh.node_sets(), "*NSET");
  write_sets(mesh.element_sets(), "*ELSET");
}

std::string serialize_mesh(const HexMesh& mesh) {
  std::ostringstream out;
  serialize_mesh(mesh, out);
  return out.str();
}

HexMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open mesh file '" + path + "'");
  try {
    return parse_mesh(in);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
}

void write_mesh_file(const HexMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write mesh file '" + path + "'");
  serialize_mesh(mesh, out);
}

}  // namespace tissuefit
