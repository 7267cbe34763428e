#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "relcoh/geometry.hpp"

namespace relcoh {

struct Rect {
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;

  double width() const { return xmax - xmin; }
  double height() const { return ymax - ymin; }
  double area() const { return width() * height(); }
  bool contains(const Point2& p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  /// Throws ErrorCode::invalid_domain unless xmin < xmax and ymin < ymax.
  void validate() const;

  friend bool operator==(const Rect&, const Rect&) = default;
};

using IndexSet = std::vector<std::size_t>;

/// Structured triangulation of a rectangle: each of the nx*ny grid cells is
/// split along its (0,0)-(1,1) diagonal. Cells are numbered row-major
/// (x fastest) and the triangle below the diagonal precedes the one above,
/// so cell c owns triangles 2c and 2c+1.
class TriMesh {
 public:
  TriMesh(const Rect& rect, std::size_t nx, std::size_t ny);

  const Rect& rect() const { return rect_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return triangles_.size(); }
  double cell_width() const { return dx_; }
  double cell_height() const { return dy_; }
  double cell_area() const { return dx_ * dy_; }
  double triangle_area(std::size_t t) const;

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<std::array<std::size_t, 3>>& triangles() const { return triangles_; }

  std::array<Point2, 3> corners(std::size_t t) const;
  Point2 centroid(std::size_t t) const;

  /// Constant-time point location; see relcoh::locate.
  std::size_t locate(const Point2& p) const;

  friend bool operator==(const TriMesh& a, const TriMesh& b) {
    return a.rect_ == b.rect_ && a.nx_ == b.nx_ && a.ny_ == b.ny_;
  }

 private:
  Rect rect_;
  std::size_t nx_;
  std::size_t ny_;
  double dx_;
  double dy_;
  std::vector<Point2> vertices_;
  std::vector<std::array<std::size_t, 3>> triangles_;
};

TriMesh build_uniform(const Rect& rect, std::size_t nx, std::size_t ny);

/// Index of the triangle containing p, or kOutside. Points on shared edges
/// go to the lower-indexed triangle. Non-finite coordinates throw
/// ErrorCode::invalid_point.
std::size_t locate(const TriMesh& mesh, const Point2& p);

/// Measure weights over the cells of a mesh. Inactive cells carry zero
/// weight; `active` is sorted and unique.
struct Partition {
  std::shared_ptr<const TriMesh> mesh;
  std::vector<double> weights;
  IndexSet active;

  std::size_t size() const { return weights.size(); }
  bool is_active(std::size_t t) const { return t < mask_.size() && mask_[t] != 0; }
  double total() const;

  Partition() = default;
  Partition(std::shared_ptr<const TriMesh> m, std::vector<double> w, IndexSet a);

 private:
  std::vector<unsigned char> mask_;
};

/// Equal weights 1/|active| on the active cells (equal-area triangles make
/// this the normalized Lebesgue measure).
Partition uniform_partition(std::shared_ptr<const TriMesh> mesh, IndexSet active);

/// Every cell active.
IndexSet all_cells(const TriMesh& mesh);

/// Sorted indices of the triangles containing at least one of the points.
/// Points outside the mesh (or non-finite) are ignored.
IndexSet occupancy_mask(const TriMesh& mesh, std::span<const Point2> points);

/// Plain-text mesh header: rect bounds, grid dims and active-cell list.
void write_mesh(std::ostream& out, const TriMesh& mesh, const IndexSet& active);

struct MeshDescription {
  Rect rect;
  std::size_t nx = 0;
  std::size_t ny = 0;
  IndexSet active;
};

MeshDescription read_mesh(std::istream& in);

}  // namespace relcoh
