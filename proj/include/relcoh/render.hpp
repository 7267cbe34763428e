#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "relcoh/hierarchy.hpp"
#include "relcoh/mesh.hpp"

namespace relcoh {

enum class RenderSide { initial, final };
enum class RenderFormat { svg, ppm };

struct RenderSpec {
  RenderSide side = RenderSide::initial;
  /// Labels are cut to this many characters before coloring, so depth d
  /// shows the level-d ancestors. 0 means full leaf labels.
  std::size_t depth = 0;
  std::uint64_t palette_seed = 0;
  RenderFormat format = RenderFormat::svg;
  /// Raster width in pixels (height follows the aspect ratio); SVG width.
  std::size_t width = 800;
};

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kUnassignedColor{160, 160, 160};

/// Color for every label shown at the given depth. Depends only on the
/// tree, the depth and the seed, so X-side and Y-side figures agree.
std::map<std::string, Rgb> make_palette(const HierarchyTree& tree, std::size_t depth,
                                        std::uint64_t seed);

/// Label of a leaf as shown at `depth` (its ancestor at that depth).
std::string label_at_depth(const std::string& label, std::size_t depth);

/// Fills every triangle with its label's color. Throws ErrorCode::validation
/// when labels.size() differs from the mesh size or depth exceeds the tree.
void render(std::ostream& out, const HierarchyTree& tree, const std::vector<std::string>& labels,
            const TriMesh& mesh, const RenderSpec& spec);

/// Figure-1 style diagram of the tree: one box per node, colored like the
/// partitions, annotated with rho*.
void render_tree_diagram(std::ostream& out, const HierarchyTree& tree, std::uint64_t palette_seed);

}  // namespace relcoh
