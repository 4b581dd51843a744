#include "ncdg/mesh/forest.hpp"

#include "ncdg/common/errors.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace ncdg {

namespace {

constexpr int kCoordBits = 19;
constexpr std::int64_t kCoordLimit = std::int64_t{1} << kCoordBits;

std::uint64_t pack_key(int level, const std::array<std::int64_t, 3>& o) {
  return (static_cast<std::uint64_t>(level) << (3 * kCoordBits)) |
         (static_cast<std::uint64_t>(o[2]) << (2 * kCoordBits)) |
         (static_cast<std::uint64_t>(o[1]) << kCoordBits) | static_cast<std::uint64_t>(o[0]);
}

std::int64_t cells_at(int root, int level) { return static_cast<std::int64_t>(root) << level; }

using LeafMap = std::unordered_map<std::uint64_t, int>;

LeafMap index_leaves(const std::vector<Leaf>& leaves) {
  LeafMap map;
  map.reserve(leaves.size() * 2);
  for (int i = 0; i < static_cast<int>(leaves.size()); ++i)
    map.emplace(pack_key(leaves[i].level, leaves[i].origin), i);
  return map;
}

// Leaf covering lattice cell (level, o): searches the cell itself and its ancestors.
int covering(const LeafMap& map, int level, std::array<std::int64_t, 3> o) {
  for (int l = level; l >= 0; --l) {
    auto it = map.find(pack_key(l, o));
    if (it != map.end())
      return it->second;
    for (auto& c : o)
      c >>= 1;
  }
  return -1;
}

// Neighbour cell of `leaf` across face `direction`; false when it leaves a non-periodic domain.
bool neighbour_cell(const Leaf& leaf, int direction, const std::array<int, 3>& root,
                    const std::array<bool, 3>& periodic, std::array<std::int64_t, 3>& out) {
  const int axis = direction / 2;
  const int step = (direction % 2 == 0) ? -1 : 1;
  out = leaf.origin;
  out[axis] += step;
  const std::int64_t n = cells_at(root[axis], leaf.level);
  if (out[axis] < 0 || out[axis] >= n) {
    if (!periodic[axis])
      return false;
    out[axis] = (out[axis] + n) % n;
  }
  return true;
}

std::vector<Leaf> children(const Leaf& leaf, int dim) {
  std::vector<Leaf> out;
  for (int c = 0; c < (1 << dim); ++c) {
    Leaf child;
    child.level = leaf.level + 1;
    for (int a = 0; a < 3; ++a)
      child.origin[a] = (a < dim) ? 2 * leaf.origin[a] + ((c >> a) & 1) : 0;
    out.push_back(child);
  }
  return out;
}

void refine_marked(std::vector<Leaf>& leaves, const std::vector<char>& marked, int dim) {
  std::vector<Leaf> next;
  next.reserve(leaves.size() + (1u << dim) * std::count(marked.begin(), marked.end(), 1));
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    if (marked[i]) {
      auto kids = children(leaves[i], dim);
      next.insert(next.end(), kids.begin(), kids.end());
    } else {
      next.push_back(leaves[i]);
    }
  }
  leaves = std::move(next);
}

void balance(std::vector<Leaf>& leaves, int dim, const std::array<int, 3>& root, const std::array<bool, 3>& periodic) {
  for (;;) {
    const LeafMap map = index_leaves(leaves);
    std::vector<char> marked(leaves.size(), 0);
    bool any = false;
    for (const auto& leaf : leaves) {
      for (int dir = 0; dir < 2 * dim; ++dir) {
        std::array<std::int64_t, 3> o;
        if (!neighbour_cell(leaf, dir, root, periodic, o))
          continue;
        const int nb = covering(map, leaf.level, o);
        if (nb >= 0 && leaves[nb].level < leaf.level - 1) {
          marked[nb] = 1;
          any = true;
        }
      }
    }
    if (!any)
      return;
    refine_marked(leaves, marked, dim);
  }
}

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    h ^= (v >> (8 * b)) & 0xffu;
    h *= 1099511628211ull;
  }
  return h;
}

} // namespace

std::uint64_t morton_key(const Leaf& leaf, int dim, int max_level) {
  std::uint64_t key = 0;
  const int shift = max_level - leaf.level;
  std::array<std::uint64_t, 3> c{};
  for (int a = 0; a < dim; ++a)
    c[a] = static_cast<std::uint64_t>(leaf.origin[a]) << shift;
  for (int bit = 0; bit < 21; ++bit)
    for (int a = 0; a < dim; ++a)
      key |= ((c[a] >> bit) & 1u) << (bit * dim + a);
  return key;
}

ForestMesh::ForestMesh(int dim, std::array<double, 3> extents, std::array<int, 3> root_counts,
                       std::array<bool, 3> periodic, std::vector<Leaf> leaves)
    : dim_(dim), extents_(extents), root_(root_counts), periodic_(periodic), leaves_(std::move(leaves)) {
  if (dim_ != 2 && dim_ != 3)
    throw ConfigError("mesh dimension must be 2 or 3");
  for (int a = 0; a < dim_; ++a) {
    if (!(extents_[a] > 0.0))
      throw ConfigError("mesh extents must be positive");
    if (root_[a] < 1)
      throw ConfigError("elements per axis must be >= 1");
  }
  for (int a = dim_; a < 3; ++a) {
    root_[a] = 1;
    extents_[a] = 1.0;
    periodic_[a] = false;
  }
  max_level_ = 0;
  for (const auto& l : leaves_)
    max_level_ = std::max(max_level_, l.level);
  for (const auto& l : leaves_)
    for (int a = 0; a < dim_; ++a)
      if (l.origin[a] < 0 || l.origin[a] >= cells_at(root_[a], l.level) || cells_at(root_[a], l.level) >= kCoordLimit)
        throw ConfigError("leaf origin outside the root grid or mesh too fine");
  std::sort(leaves_.begin(), leaves_.end(), [&](const Leaf& a, const Leaf& b) {
    return morton_key(a, dim_, max_level_) < morton_key(b, dim_, max_level_);
  });
  lookup_ = index_leaves(leaves_);
  if (lookup_.size() != leaves_.size())
    throw ConfigError("duplicate leaves");
  // Exact tiling: no leaf is an ancestor of another, and the volumes add up.
  std::uint64_t volume = 0;
  for (const auto& l : leaves_) {
    auto o = l.origin;
    for (int lv = l.level - 1; lv >= 0; --lv) {
      for (auto& c : o)
        c >>= 1;
      if (lookup_.count(pack_key(lv, o)))
        throw ConfigError("overlapping leaves");
    }
    volume += std::uint64_t{1} << (dim_ * (max_level_ - l.level));
  }
  if (volume != static_cast<std::uint64_t>(root_[0]) * root_[1] * root_[2] << (dim_ * max_level_))
    throw ConfigError("leaves do not tile the root grid");
  build_faces();

  std::uint64_t h = 1469598103934665603ull;
  h = fnv1a(h, dim_);
  for (int a = 0; a < 3; ++a) {
    std::uint64_t bits;
    std::memcpy(&bits, &extents_[a], sizeof(bits));
    h = fnv1a(h, bits);
    h = fnv1a(h, root_[a]);
    h = fnv1a(h, periodic_[a]);
  }
  for (const auto& l : leaves_)
    h = fnv1a(h, pack_key(l.level, l.origin));
  fingerprint_ = h;
}

int ForestMesh::find_covering_leaf(int level, std::array<std::int64_t, 3> origin) const {
  return covering(lookup_, level, origin);
}

void ForestMesh::build_faces() {
  faces_.clear();
  const int n = num_leaves();
  std::vector<std::vector<FaceSlot>> per_leaf(n);
  // Hanging sub-faces are discovered from the fine side; record them on the coarse side too.
  for (int i = 0; i < n; ++i) {
    const Leaf& leaf = leaves_[i];
    for (int dir = 0; dir < 2 * dim_; ++dir) {
      const int axis = dir / 2;
      const bool high = dir % 2 == 1;
      std::array<std::int64_t, 3> o;
      if (!neighbour_cell(leaf, dir, root_, periodic_, o)) {
        Face f;
        f.left = i;
        f.axis = axis;
        f.kind = FaceKind::Boundary;
        f.boundary_tag = dir;
        faces_.push_back(f);
        per_leaf[i].push_back({static_cast<int>(faces_.size()) - 1, 0, dir, -1});
        continue;
      }
      const int nb = covering(lookup_, leaf.level, o);
      if (nb < 0)
        continue;  // neighbour is finer; its sub-faces are added from the other side
      if (leaves_[nb].level == leaf.level) {
        if (!high)
          continue;  // added by the lower leaf
        Face f;
        f.left = i;
        f.right = nb;
        f.axis = axis;
        f.kind = FaceKind::Conforming;
        faces_.push_back(f);
        const int id = static_cast<int>(faces_.size()) - 1;
        per_leaf[i].push_back({id, 0, dir, -1});
        per_leaf[nb].push_back({id, 1, dir ^ 1, -1});
      } else {
        int sub = 0, bit = 0;
        for (int b = 0; b < dim_; ++b) {
          if (b == axis)
            continue;
          sub |= static_cast<int>(leaf.origin[b] & 1) << bit;
          ++bit;
        }
        Face f;
        f.axis = axis;
        f.kind = FaceKind::Hanging;
        f.subface = sub;
        if (high) {
          f.left = i;
          f.right = nb;
          f.coarse_side = 1;
        } else {
          f.left = nb;
          f.right = i;
          f.coarse_side = 0;
        }
        faces_.push_back(f);
        const int id = static_cast<int>(faces_.size()) - 1;
        per_leaf[i].push_back({id, high ? 0 : 1, dir, -1});
        per_leaf[nb].push_back({id, high ? 1 : 0, dir ^ 1, sub});
      }
    }
  }
  slot_offsets_.assign(n + 1, 0);
  slots_.clear();
  for (int i = 0; i < n; ++i) {
    auto& s = per_leaf[i];
    std::sort(s.begin(), s.end(), [](const FaceSlot& a, const FaceSlot& b) {
      return a.direction != b.direction ? a.direction < b.direction : a.subface < b.subface;
    });
    slots_.insert(slots_.end(), s.begin(), s.end());
    slot_offsets_[i + 1] = static_cast<int>(slots_.size());
  }
}

std::span<const FaceSlot> ForestMesh::slots(int leaf) const {
  return {slots_.data() + slot_offsets_[leaf], slots_.data() + slot_offsets_[leaf + 1]};
}

LeafBox ForestMesh::box(int i) const {
  const Leaf& l = leaves_[i];
  LeafBox b;
  b.index = i;
  b.level = l.level;
  for (int a = 0; a < dim_; ++a) {
    const double h = root_size(a) / static_cast<double>(std::int64_t{1} << l.level);
    b.lower[a] = l.origin[a] * h;
    b.upper[a] = (l.origin[a] + 1) * h;
  }
  return b;
}

int ForestMesh::num_interior_faces() const {
  return static_cast<int>(std::count_if(faces_.begin(), faces_.end(),
                                        [](const Face& f) { return f.kind != FaceKind::Boundary; }));
}

int ForestMesh::num_boundary_faces() const {
  return static_cast<int>(std::count_if(faces_.begin(), faces_.end(),
                                        [](const Face& f) { return f.kind == FaceKind::Boundary; }));
}

int ForestMesh::num_hanging_faces() const {
  return static_cast<int>(std::count_if(faces_.begin(), faces_.end(),
                                        [](const Face& f) { return f.kind == FaceKind::Hanging; }));
}

int ForestMesh::num_root_cells() const { return root_[0] * root_[1] * root_[2]; }

ForestMesh build_uniform_mesh(int dim, std::array<double, 3> extents, std::array<int, 3> elements_per_axis,
                              std::array<bool, 3> periodic) {
  if (dim != 2 && dim != 3)
    throw ConfigError("mesh dimension must be 2 or 3");
  for (int a = 0; a < dim; ++a) {
    if (!(extents[a] > 0.0))
      throw ConfigError("mesh extents must be positive");
    if (elements_per_axis[a] < 1)
      throw ConfigError("elements per axis must be >= 1");
  }
  std::vector<Leaf> leaves;
  const int nz = dim == 3 ? elements_per_axis[2] : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < elements_per_axis[1]; ++j)
      for (int i = 0; i < elements_per_axis[0]; ++i)
        leaves.push_back(Leaf{0, {i, j, k}});
  return ForestMesh(dim, extents, elements_per_axis, periodic, std::move(leaves));
}

ForestMesh refine_region(const ForestMesh& mesh, const std::function<bool(const LeafBox&)>& predicate, int times) {
  std::vector<Leaf> leaves = mesh.leaves();
  for (int t = 0; t < times; ++t) {
    // Evaluate the predicate on the current (Morton-ordered) leaf set.
    ForestMesh current(mesh.dim(), mesh.extents(), mesh.root_counts(), mesh.periodic(), leaves);
    std::vector<char> marked(current.num_leaves(), 0);
    for (int i = 0; i < current.num_leaves(); ++i)
      marked[i] = predicate(current.box(i)) ? 1 : 0;
    leaves = current.leaves();
    refine_marked(leaves, marked, mesh.dim());
    balance(leaves, mesh.dim(), mesh.root_counts(), mesh.periodic());
  }
  return ForestMesh(mesh.dim(), mesh.extents(), mesh.root_counts(), mesh.periodic(), std::move(leaves));
}

void write_mesh(std::ostream& os, const ForestMesh& mesh) {
  os.precision(17);
  os << "ncdg-forest 1\n";
  os << "dim " << mesh.dim() << "\n";
  os << "extents";
  for (int a = 0; a < mesh.dim(); ++a)
    os << ' ' << mesh.extents()[a];
  os << "\nroot";
  for (int a = 0; a < mesh.dim(); ++a)
    os << ' ' << mesh.root_counts()[a];
  os << "\nperiodic";
  for (int a = 0; a < mesh.dim(); ++a)
    os << ' ' << (mesh.periodic()[a] ? 1 : 0);
  os << "\nleaves " << mesh.num_leaves() << "\n";
  for (const auto& l : mesh.leaves()) {
    os << l.level;
    for (int a = 0; a < mesh.dim(); ++a)
      os << ' ' << l.origin[a];
    os << '\n';
  }
}

ForestMesh read_mesh(std::istream& is) {
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "ncdg-forest")
    throw InputError("not an ncdg mesh dump");
  if (version != 1)
    throw InputError("unsupported mesh dump version " + std::to_string(version));
  auto expect = [&](const char* key) {
    std::string k;
    if (!(is >> k) || k != key)
      throw InputError(std::string("mesh dump: expected '") + key + "'");
  };
  int dim = 0;
  expect("dim");
  is >> dim;
  if (dim != 2 && dim != 3)
    throw InputError("mesh dump: bad dimension");
  std::array<double, 3> ext{1, 1, 1};
  std::array<int, 3> root{1, 1, 1};
  std::array<bool, 3> per{false, false, false};
  expect("extents");
  for (int a = 0; a < dim; ++a)
    is >> ext[a];
  expect("root");
  for (int a = 0; a < dim; ++a)
    is >> root[a];
  expect("periodic");
  for (int a = 0; a < dim; ++a) {
    int p;
    is >> p;
    per[a] = p != 0;
  }
  expect("leaves");
  std::size_t n = 0;
  is >> n;
  std::vector<Leaf> leaves(n);
  for (auto& l : leaves) {
    is >> l.level;
    for (int a = 0; a < dim; ++a)
      is >> l.origin[a];
  }
  if (!is)
    throw InputError("mesh dump truncated");
  return ForestMesh(dim, ext, root, per, std::move(leaves));
}

} // namespace ncdg
