#include "relcoh/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "relcoh/error.hpp"
#include "text_io.hpp"

namespace relcoh {

namespace {

Rgb hsv(double h, double s, double v) {
  h = h - std::floor(h);
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  const double m = v - c;
  auto byte = [](double t) { return static_cast<std::uint8_t>(std::lround(255.0 * t)); };
  return {byte(r + m), byte(g + m), byte(b + m)};
}

std::string hex(const Rgb& c) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

std::string display_label(const std::string& label) { return label.empty() ? "root" : label; }

}  // namespace

std::string label_at_depth(const std::string& label, std::size_t depth) {
  if (label == kUnassigned || label == "root" || depth == 0 || label.size() <= depth) return label;
  return label.substr(0, depth);
}

std::map<std::string, Rgb> make_palette(const HierarchyTree& tree, std::size_t depth,
                                        std::uint64_t seed) {
  std::set<std::string> shown;
  for (const auto* n : tree.nodes()) {
    if (n->is_leaf() || (depth > 0 && n->depth == depth)) shown.insert(label_at_depth(display_label(n->label), depth));
  }
  // Golden-ratio hue steps over the sorted labels; the seed rotates the wheel.
  const double offset = static_cast<double>(seed % 1000003) * 0.6180339887498949;
  std::map<std::string, Rgb> palette;
  std::size_t k = 0;
  for (const auto& label : shown) {
    const double h = offset + 0.6180339887498949 * static_cast<double>(k);
    const double s = (k % 3 == 0) ? 0.75 : (k % 3 == 1 ? 0.55 : 0.9);
    const double v = (k % 2 == 0) ? 0.9 : 0.7;
    palette[label] = hsv(h, s, v);
    ++k;
  }
  return palette;
}

void render(std::ostream& out, const HierarchyTree& tree, const std::vector<std::string>& labels,
            const TriMesh& mesh, const RenderSpec& spec) {
  if (labels.size() != mesh.size())
    throw Error(ErrorCode::validation, "label count " + std::to_string(labels.size()) +
                                           " does not match mesh size " +
                                           std::to_string(mesh.size()));
  if (spec.depth > tree.reached_depth())
    throw Error(ErrorCode::validation, "render depth " + std::to_string(spec.depth) +
                                           " exceeds tree depth " +
                                           std::to_string(tree.reached_depth()));
  if (spec.width == 0) throw Error(ErrorCode::validation, "render width must be positive");

  const auto palette = make_palette(tree, spec.depth, spec.palette_seed);
  std::vector<Rgb> color(mesh.size(), kUnassignedColor);
  for (std::size_t t = 0; t < mesh.size(); ++t) {
    if (labels[t] == kUnassigned) continue;
    auto it = palette.find(label_at_depth(labels[t], spec.depth));
    if (it == palette.end())
      throw Error(ErrorCode::validation, "cell " + std::to_string(t) + " has label '" +
                                             labels[t] + "' which is not a tree leaf");
    color[t] = it->second;
  }

  const Rect& r = mesh.rect();
  const double W = static_cast<double>(spec.width);
  const double scale = W / r.width();
  const auto H = static_cast<std::size_t>(std::max(1.0, std::round(r.height() * scale)));

  if (spec.format == RenderFormat::svg) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
        << H << "\" viewBox=\"0 0 " << spec.width << ' ' << H << "\">\n";
    out << "<g stroke-width=\"0.4\">\n";
    for (std::size_t t = 0; t < mesh.size(); ++t) {
      const auto c = mesh.corners(t);
      const std::string fill = hex(color[t]);
      out << "<polygon fill=\"" << fill << "\" stroke=\"" << fill << "\" points=\"";
      for (int k = 0; k < 3; ++k) {
        const double px = (c[k].x - r.xmin) * scale;
        const double py = (r.ymax - c[k].y) * scale;
        out << (k ? " " : "") << detail::fmt(std::round(px * 100) / 100) << ','
            << detail::fmt(std::round(py * 100) / 100);
      }
      out << "\"/>\n";
    }
    out << "</g>\n</svg>\n";
    return;
  }

  out << "P6\n" << spec.width << ' ' << H << "\n255\n";
  std::vector<char> row(spec.width * 3);
  for (std::size_t py = 0; py < H; ++py) {
    const double y = r.ymax - (static_cast<double>(py) + 0.5) / scale;
    for (std::size_t px = 0; px < spec.width; ++px) {
      const double x = r.xmin + (static_cast<double>(px) + 0.5) / scale;
      const std::size_t t = mesh.locate({x, y});
      const Rgb c = t == kOutside ? kUnassignedColor : color[t];
      for (int k = 0; k < 3; ++k) row[3 * px + k] = static_cast<char>(c[k]);
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

void render_tree_diagram(std::ostream& out, const HierarchyTree& tree, std::uint64_t palette_seed) {
  const auto nodes = tree.nodes();
  const std::size_t depth = tree.reached_depth();
  const auto palette = make_palette(tree, 0, palette_seed);

  // Leaves get consecutive slots; internal nodes sit above their children.
  std::map<const HierarchyNode*, double> xpos;
  double slot = 0.0;
  auto place = [&](auto&& self, const HierarchyNode& n) -> double {
    if (n.is_leaf()) return xpos[&n] = slot++;
    double sum = 0.0;
    for (const auto& c : n.children) sum += self(self, c);
    return xpos[&n] = sum / static_cast<double>(n.children.size());
  };
  place(place, tree.root);

  const double dx = 90.0, dy = 80.0, bw = 80.0, bh = 36.0;
  const double width = std::max(1.0, slot) * dx + 20.0;
  const double height = static_cast<double>(depth + 1) * dy + 20.0;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << detail::fmt(width)
      << "\" height=\"" << detail::fmt(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  auto cx = [&](const HierarchyNode* n) { return 10.0 + xpos[n] * dx + dx / 2; };
  auto cy = [&](const HierarchyNode* n) { return 10.0 + static_cast<double>(n->depth) * dy + bh / 2; };
  for (const auto* n : nodes)
    for (const auto& c : n->children)
      out << "<line x1=\"" << detail::fmt(cx(n)) << "\" y1=\"" << detail::fmt(cy(n) + bh / 2)
          << "\" x2=\"" << detail::fmt(cx(&c)) << "\" y2=\"" << detail::fmt(cy(&c) - bh / 2)
          << "\" stroke=\"#444\"/>\n";
  for (const auto* n : nodes) {
    const std::string name = display_label(n->label);
    auto it = palette.find(name);
    const std::string fill = it == palette.end() ? "#ffffff" : hex(it->second);
    out << "<rect x=\"" << detail::fmt(cx(n) - bw / 2) << "\" y=\"" << detail::fmt(cy(n) - bh / 2)
        << "\" width=\"" << bw << "\" height=\"" << bh << "\" fill=\"" << fill
        << "\" stroke=\"#222\"/>\n";
    out << "<text x=\"" << detail::fmt(cx(n)) << "\" y=\"" << detail::fmt(cy(n) - 3)
        << "\" text-anchor=\"middle\">" << name << "</text>\n";
    char buf[64];
    if (n->rho_star)
      std::snprintf(buf, sizeof(buf), "rho* %.4f", *n->rho_star);
    else
      std::snprintf(buf, sizeof(buf), "%s", to_string(n->status));
    out << "<text x=\"" << detail::fmt(cx(n)) << "\" y=\"" << detail::fmt(cy(n) + 11)
        << "\" text-anchor=\"middle\">" << buf << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace relcoh
