#include "relcoh/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "relcoh/error.hpp"
#include "text_io.hpp"

namespace relcoh {

void Rect::validate() const {
  if (!(std::isfinite(xmin) && std::isfinite(xmax) && std::isfinite(ymin) &&
        std::isfinite(ymax)) ||
      !(xmin < xmax) || !(ymin < ymax)) {
    throw Error(ErrorCode::invalid_domain,
                "degenerate rect [" + detail::fmt(xmin) + "," + detail::fmt(xmax) + "]x[" +
                    detail::fmt(ymin) + "," + detail::fmt(ymax) + "]");
  }
}

TriMesh::TriMesh(const Rect& rect, std::size_t nx, std::size_t ny)
    : rect_(rect), nx_(nx), ny_(ny) {
  rect.validate();
  if (nx == 0 || ny == 0)
    throw Error(ErrorCode::invalid_domain, "grid needs at least one cell per axis");
  dx_ = rect.width() / static_cast<double>(nx);
  dy_ = rect.height() / static_cast<double>(ny);

  vertices_.reserve((nx + 1) * (ny + 1));
  for (std::size_t iy = 0; iy <= ny; ++iy) {
    // Last row/column pinned to the exact bounds.
    const double y = iy == ny ? rect.ymax : rect.ymin + dy_ * static_cast<double>(iy);
    for (std::size_t ix = 0; ix <= nx; ++ix) {
      const double x = ix == nx ? rect.xmax : rect.xmin + dx_ * static_cast<double>(ix);
      vertices_.push_back({x, y});
    }
  }

  triangles_.reserve(2 * nx * ny);
  const std::size_t stride = nx + 1;
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t v00 = iy * stride + ix;
      const std::size_t v10 = v00 + 1;
      const std::size_t v01 = v00 + stride;
      const std::size_t v11 = v01 + 1;
      triangles_.push_back({v00, v10, v11});
      triangles_.push_back({v00, v11, v01});
    }
  }
}

std::array<Point2, 3> TriMesh::corners(std::size_t t) const {
  const auto& tri = triangles_.at(t);
  return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

double TriMesh::triangle_area(std::size_t t) const {
  const auto c = corners(t);
  return 0.5 * ((c[1].x - c[0].x) * (c[2].y - c[0].y) - (c[2].x - c[0].x) * (c[1].y - c[0].y));
}

Point2 TriMesh::centroid(std::size_t t) const {
  const auto c = corners(t);
  return {(c[0].x + c[1].x + c[2].x) / 3.0, (c[0].y + c[1].y + c[2].y) / 3.0};
}

namespace {

// Cell index along one axis. Exact grid-line hits resolve to the lower cell,
// which owns the lower-indexed triangle on the shared edge.
std::size_t axis_cell(double offset, double step, std::size_t n) {
  const double s = offset / step;
  const double c = std::ceil(s) - 1.0;
  if (c <= 0.0) return 0;
  const auto i = static_cast<std::size_t>(c);
  return std::min(i, n - 1);
}

}  // namespace

std::size_t TriMesh::locate(const Point2& p) const {
  if (!is_finite(p))
    throw Error(ErrorCode::invalid_point, "non-finite point (" + detail::fmt(p.x) + ", " +
                                              detail::fmt(p.y) + ")");
  if (!rect_.contains(p)) return kOutside;
  const std::size_t ix = axis_cell(p.x - rect_.xmin, dx_, nx_);
  const std::size_t iy = axis_cell(p.y - rect_.ymin, dy_, ny_);
  const double s = (p.x - vertices_[ix].x) / dx_;
  const double r = (p.y - vertices_[iy * (nx_ + 1)].y) / dy_;
  const std::size_t cell = iy * nx_ + ix;
  return r <= s ? 2 * cell : 2 * cell + 1;
}

TriMesh build_uniform(const Rect& rect, std::size_t nx, std::size_t ny) {
  return TriMesh(rect, nx, ny);
}

std::size_t locate(const TriMesh& mesh, const Point2& p) { return mesh.locate(p); }

Partition::Partition(std::shared_ptr<const TriMesh> m, std::vector<double> w, IndexSet a)
    : mesh(std::move(m)), weights(std::move(w)), active(std::move(a)) {
  mask_.assign(weights.size(), 0);
  for (std::size_t t : active) {
    if (t >= weights.size())
      throw Error(ErrorCode::invalid_argument, "active cell index out of range");
    mask_[t] = 1;
  }
}

double Partition::total() const {
  double s = 0.0;
  for (std::size_t t : active) s += weights[t];
  return s;
}

IndexSet all_cells(const TriMesh& mesh) {
  IndexSet all(mesh.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return all;
}

Partition uniform_partition(std::shared_ptr<const TriMesh> mesh, IndexSet active) {
  if (!mesh) throw Error(ErrorCode::invalid_argument, "null mesh");
  std::sort(active.begin(), active.end());
  active.erase(std::unique(active.begin(), active.end()), active.end());
  if (active.empty()) throw Error(ErrorCode::empty_partition, "partition has no active cells");
  std::vector<double> w(mesh->size(), 0.0);
  const double each = 1.0 / static_cast<double>(active.size());
  for (std::size_t t : active) {
    if (t >= w.size()) throw Error(ErrorCode::invalid_argument, "active cell index out of range");
    w[t] = each;
  }
  return Partition(std::move(mesh), std::move(w), std::move(active));
}

IndexSet occupancy_mask(const TriMesh& mesh, std::span<const Point2> points) {
  std::vector<unsigned char> hit(mesh.size(), 0);
  for (const auto& p : points) {
    if (!is_finite(p)) continue;
    const std::size_t t = mesh.locate(p);
    if (t != kOutside) hit[t] = 1;
  }
  IndexSet out;
  for (std::size_t t = 0; t < hit.size(); ++t)
    if (hit[t]) out.push_back(t);
  return out;
}

void write_mesh(std::ostream& out, const TriMesh& mesh, const IndexSet& active) {
  const Rect& r = mesh.rect();
  out << "relcoh-mesh 1\n";
  out << "rect " << detail::fmt(r.xmin) << ' ' << detail::fmt(r.xmax) << ' '
      << detail::fmt(r.ymin) << ' ' << detail::fmt(r.ymax) << '\n';
  out << "grid " << mesh.nx() << ' ' << mesh.ny() << '\n';
  out << "active " << active.size() << '\n';
  for (std::size_t k = 0; k < active.size(); ++k)
    out << active[k] << ((k + 1) % 16 == 0 || k + 1 == active.size() ? '\n' : ' ');
}

MeshDescription read_mesh(std::istream& in) {
  detail::TokenReader rd(in, "mesh");
  rd.expect("relcoh-mesh");
  if (rd.count() != 1) rd.fail("unsupported version");
  MeshDescription d;
  rd.expect("rect");
  d.rect.xmin = rd.real();
  d.rect.xmax = rd.real();
  d.rect.ymin = rd.real();
  d.rect.ymax = rd.real();
  rd.expect("grid");
  d.nx = rd.count();
  d.ny = rd.count();
  rd.expect("active");
  const std::size_t n = rd.count();
  d.active.resize(n);
  for (auto& a : d.active) {
    a = rd.count();
    if (a >= 2 * d.nx * d.ny) rd.fail("active index out of range");
  }
  return d;
}

}  // namespace relcoh
