#include "modaseg/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace modaseg {

namespace {

// NIfTI-1 header, 348 bytes. Only the fields we use are named meaningfully;
// the rest are kept for layout.
#pragma pack(push, 1)
struct Nifti1Header {
  std::int32_t sizeof_hdr;
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1, intent_p2, intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max, cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax, glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code;
  std::int16_t sform_code;
  float quatern_b, quatern_c, quatern_d;
  float qoffset_x, qoffset_y, qoffset_z;
  float srow_x[4];
  float srow_y[4];
  float srow_z[4];
  char intent_name[16];
  char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must be 348 bytes");

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtInt32 = 8;
constexpr std::int16_t kDtFloat32 = 16;
constexpr std::int16_t kDtFloat64 = 64;
constexpr std::int16_t kDtUint16 = 512;

template <typename T>
void swap_bytes(T& v) {
  auto* p = reinterpret_cast<unsigned char*>(&v);
  std::reverse(p, p + sizeof(T));
}

void swap_header(Nifti1Header& h) {
  swap_bytes(h.sizeof_hdr);
  for (auto& d : h.dim) swap_bytes(d);
  swap_bytes(h.intent_p1);
  swap_bytes(h.intent_p2);
  swap_bytes(h.intent_p3);
  swap_bytes(h.intent_code);
  swap_bytes(h.datatype);
  swap_bytes(h.bitpix);
  swap_bytes(h.slice_start);
  for (auto& d : h.pixdim) swap_bytes(d);
  swap_bytes(h.vox_offset);
  swap_bytes(h.scl_slope);
  swap_bytes(h.scl_inter);
  swap_bytes(h.slice_end);
  swap_bytes(h.cal_max);
  swap_bytes(h.cal_min);
  swap_bytes(h.slice_duration);
  swap_bytes(h.toffset);
  swap_bytes(h.glmax);
  swap_bytes(h.glmin);
  swap_bytes(h.qform_code);
  swap_bytes(h.sform_code);
  swap_bytes(h.quatern_b);
  swap_bytes(h.quatern_c);
  swap_bytes(h.quatern_d);
  swap_bytes(h.qoffset_x);
  swap_bytes(h.qoffset_y);
  swap_bytes(h.qoffset_z);
  for (auto& s : h.srow_x) swap_bytes(s);
  for (auto& s : h.srow_y) swap_bytes(s);
  for (auto& s : h.srow_z) swap_bytes(s);
}

class GzReader {
 public:
  explicit GzReader(const std::string& path) : path_(path) {
    f_ = gzopen(path.c_str(), "rb");
    if (!f_) throw std::runtime_error("cannot open file for reading: " + path);
  }
  ~GzReader() {
    if (f_) gzclose(f_);
  }
  void read(void* dst, std::size_t n) {
    if (gzread(f_, dst, static_cast<unsigned>(n)) != static_cast<int>(n))
      throw std::runtime_error("truncated or unreadable file: " + path_);
  }
  void skip(std::size_t n) {
    std::vector<char> buf(std::min<std::size_t>(n, 65536));
    while (n > 0) {
      std::size_t chunk = std::min(n, buf.size());
      read(buf.data(), chunk);
      n -= chunk;
    }
  }

 private:
  std::string path_;
  gzFile f_ = nullptr;
};

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// re-orthonormalize by Gram-Schmidt; header floats carry ~1e-7 error
Mat3 orthonormalize(Mat3 d) {
  Vec3 c0{d[0][0], d[1][0], d[2][0]};
  Vec3 c1{d[0][1], d[1][1], d[2][1]};
  Vec3 c2{d[0][2], d[1][2], d[2][2]};
  auto norm = [](const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); };
  auto scale = [](Vec3& v, double s) { v[0] *= s; v[1] *= s; v[2] *= s; };
  auto dot = [](const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; };
  double n0 = norm(c0);
  if (n0 < 1e-12) throw std::runtime_error("degenerate direction matrix");
  scale(c0, 1.0 / n0);
  double d01 = dot(c0, c1);
  for (int i = 0; i < 3; ++i) c1[i] -= d01 * c0[i];
  double n1 = norm(c1);
  if (n1 < 1e-12) throw std::runtime_error("degenerate direction matrix");
  scale(c1, 1.0 / n1);
  double d02 = dot(c0, c2), d12 = dot(c1, c2);
  for (int i = 0; i < 3; ++i) c2[i] -= d02 * c0[i] + d12 * c1[i];
  double n2 = norm(c2);
  if (n2 < 1e-12) throw std::runtime_error("degenerate direction matrix");
  scale(c2, 1.0 / n2);
  Mat3 r{};
  for (int i = 0; i < 3; ++i) {
    r[i][0] = c0[i];
    r[i][1] = c1[i];
    r[i][2] = c2[i];
  }
  return r;
}

Geometry geometry_from_header(const Nifti1Header& h, const std::string& path) {
  Geometry g;
  g.shape = {h.dim[1], h.dim[2], h.dim[3]};
  if (h.sform_code > 0) {
    const float* rows[3] = {h.srow_x, h.srow_y, h.srow_z};
    Mat3 dir{};
    for (int c = 0; c < 3; ++c) {
      double n = 0.0;
      for (int r = 0; r < 3; ++r) n += static_cast<double>(rows[r][c]) * rows[r][c];
      n = std::sqrt(n);
      if (n < 1e-12) throw std::runtime_error("degenerate sform in " + path);
      g.spacing[c] = n;
      for (int r = 0; r < 3; ++r) dir[r][c] = rows[r][c] / n;
    }
    if (orthonormality_error(dir) > 1e-3)
      throw std::runtime_error("non-orthonormal direction beyond tolerance in " + path);
    g.direction = orthonormalize(dir);
    g.origin = {h.srow_x[3], h.srow_y[3], h.srow_z[3]};
  } else if (h.qform_code > 0) {
    double b = h.quatern_b, c = h.quatern_c, d = h.quatern_d;
    double a2 = 1.0 - (b * b + c * c + d * d);
    double a = a2 > 0 ? std::sqrt(a2) : 0.0;
    double qfac = (h.pixdim[0] < 0.0f) ? -1.0 : 1.0;
    Mat3 dir = {{{a * a + b * b - c * c - d * d, 2 * (b * c - a * d), qfac * 2 * (b * d + a * c)},
                 {2 * (b * c + a * d), a * a + c * c - b * b - d * d, qfac * 2 * (c * d - a * b)},
                 {2 * (b * d - a * c), 2 * (c * d + a * b), qfac * (a * a + d * d - b * b - c * c)}}};
    g.direction = orthonormalize(dir);
    for (int i = 0; i < 3; ++i) g.spacing[i] = h.pixdim[i + 1] > 0 ? h.pixdim[i + 1] : 1.0;
    g.origin = {h.qoffset_x, h.qoffset_y, h.qoffset_z};
  } else {
    for (int i = 0; i < 3; ++i) g.spacing[i] = h.pixdim[i + 1] > 0 ? h.pixdim[i + 1] : 1.0;
  }
  return g;
}

Volume load_raw(const std::string& path) {
  GzReader in(path);
  Nifti1Header h{};
  in.read(&h, sizeof(h));
  bool swapped = false;
  if (h.sizeof_hdr != 348) {
    swap_header(h);
    swapped = true;
    if (h.sizeof_hdr != 348) throw std::runtime_error("not a NIfTI-1 file: " + path);
  }
  if (std::strncmp(h.magic, "n+1", 3) != 0)
    throw std::runtime_error("unsupported NIfTI variant (expected single-file n+1): " + path);
  int ndim = h.dim[0];
  for (int d = 4; d <= ndim && d < 8; ++d)
    if (h.dim[d] > 1) throw std::runtime_error("non-3D image: " + path);
  if (ndim < 3 || h.dim[1] < 1 || h.dim[2] < 1 || h.dim[3] < 1)
    throw std::runtime_error("non-3D image: " + path);

  Geometry geom = geometry_from_header(h, path);
  std::size_t n = geom.voxel_count();

  std::size_t offset = static_cast<std::size_t>(h.vox_offset);
  if (offset < sizeof(Nifti1Header)) throw std::runtime_error("bad vox_offset in " + path);
  in.skip(offset - sizeof(Nifti1Header));

  Volume v(geom);
  auto read_as = [&](auto tag) {
    using T = decltype(tag);
    std::vector<T> buf(n);
    in.read(buf.data(), n * sizeof(T));
    if (swapped)
      for (auto& x : buf) swap_bytes(x);
    for (std::size_t i = 0; i < n; ++i) v.data[i] = static_cast<float>(buf[i]);
  };
  switch (h.datatype) {
    case kDtUint8: read_as(std::uint8_t{}); break;
    case kDtInt16: read_as(std::int16_t{}); break;
    case kDtUint16: read_as(std::uint16_t{}); break;
    case kDtInt32: read_as(std::int32_t{}); break;
    case kDtFloat32: read_as(float{}); break;
    case kDtFloat64: read_as(double{}); break;
    default:
      throw std::runtime_error("unsupported NIfTI datatype " + std::to_string(h.datatype) + ": " + path);
  }

  if (h.scl_slope != 0.0f && !(h.scl_slope == 1.0f && h.scl_inter == 0.0f))
    for (auto& x : v.data) x = x * h.scl_slope + h.scl_inter;

  for (float x : v.data)
    if (!std::isfinite(x)) throw std::runtime_error("non-finite data in " + path);
  return v;
}

Nifti1Header make_header(const Geometry& g, std::int16_t datatype, std::int16_t bitpix) {
  Nifti1Header h{};
  h.sizeof_hdr = 348;
  h.regular = 'r';
  h.dim[0] = 3;
  h.dim[1] = static_cast<std::int16_t>(g.shape[0]);
  h.dim[2] = static_cast<std::int16_t>(g.shape[1]);
  h.dim[3] = static_cast<std::int16_t>(g.shape[2]);
  for (int d = 4; d < 8; ++d) h.dim[d] = 1;
  h.datatype = datatype;
  h.bitpix = bitpix;
  h.pixdim[0] = 1.0f;
  for (int i = 0; i < 3; ++i) h.pixdim[i + 1] = static_cast<float>(g.spacing[i]);
  h.vox_offset = 352.0f;
  h.scl_slope = 1.0f;
  h.scl_inter = 0.0f;
  h.xyzt_units = 2;  // millimetres
  h.sform_code = 1;
  h.qform_code = 0;
  float* rows[3] = {h.srow_x, h.srow_y, h.srow_z};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c)
      rows[r][c] = static_cast<float>(g.direction[r][c] * g.spacing[c]);
    rows[r][3] = static_cast<float>(g.origin[r]);
  }
  std::memcpy(h.magic, "n+1", 4);
  return h;
}

void write_file(const std::string& path, const Nifti1Header& h, const void* voxels,
                std::size_t nbytes) {
  const char pad[4] = {0, 0, 0, 0};
  if (ends_with(path, ".gz")) {
    gzFile f = gzopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open file for writing: " + path);
    bool ok = gzwrite(f, &h, sizeof(h)) == static_cast<int>(sizeof(h)) &&
              gzwrite(f, pad, 4) == 4 &&
              gzwrite(f, voxels, static_cast<unsigned>(nbytes)) == static_cast<int>(nbytes);
    ok = (gzclose(f) == Z_OK) && ok;
    if (!ok) throw std::runtime_error("write failed: " + path);
  } else {
    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open file for writing: " + path);
    bool ok = std::fwrite(&h, 1, sizeof(h), f) == sizeof(h) && std::fwrite(pad, 1, 4, f) == 4 &&
              std::fwrite(voxels, 1, nbytes, f) == nbytes;
    ok = (std::fclose(f) == 0) && ok;
    if (!ok) throw std::runtime_error("write failed: " + path);
  }
}

template <typename Img>
Img reorient_impl(const Img& in) {
  // pick, for each world axis, the voxel axis with the dominant direction
  const Mat3& d = in.geom.direction;
  std::array<int, 3> perm{-1, -1, -1};  // perm[new_axis] = old_axis
  std::array<int, 3> sign{1, 1, 1};
  std::array<bool, 3> used{false, false, false};
  for (int c = 0; c < 3; ++c) {  // old voxel axis c maps to world axis r*
    int best_r = 0;
    double best = 0.0;
    for (int r = 0; r < 3; ++r)
      if (std::abs(d[r][c]) > best) {
        best = std::abs(d[r][c]);
        best_r = r;
      }
    if (used[best_r]) return in;  // ambiguous (oblique); leave untouched
    used[best_r] = true;
    perm[best_r] = c;
    sign[best_r] = d[best_r][c] >= 0 ? 1 : -1;
  }
  bool identity = perm[0] == 0 && perm[1] == 1 && perm[2] == 2 && sign[0] == 1 && sign[1] == 1 &&
                  sign[2] == 1;
  if (identity) return in;

  Geometry g;
  for (int a = 0; a < 3; ++a) {
    g.shape[a] = in.geom.shape[perm[a]];
    g.spacing[a] = in.geom.spacing[perm[a]];
  }
  for (int r = 0; r < 3; ++r)
    for (int a = 0; a < 3; ++a) g.direction[r][a] = in.geom.direction[r][perm[a]] * sign[a];
  // origin: world position of the new (0,0,0) voxel
  Vec3 first_old{};
  for (int a = 0; a < 3; ++a) {
    double idx = sign[a] > 0 ? 0.0 : in.geom.shape[perm[a]] - 1.0;
    first_old[perm[a]] = idx;
  }
  g.origin = in.geom.voxel_to_world(first_old);

  Img out(g);
  for (int z = 0; z < g.shape[2]; ++z)
    for (int y = 0; y < g.shape[1]; ++y)
      for (int x = 0; x < g.shape[0]; ++x) {
        std::array<int, 3> ni{x, y, z};
        std::array<int, 3> oi{};
        for (int a = 0; a < 3; ++a) {
          int idx = sign[a] > 0 ? ni[a] : g.shape[a] - 1 - ni[a];
          oi[perm[a]] = idx;
        }
        out.at(x, y, z) = in.at(oi[0], oi[1], oi[2]);
      }
  return out;
}

}  // namespace

Volume reorient_to_canonical(const Volume& v) { return reorient_impl(v); }
LabelMap reorient_to_canonical(const LabelMap& l) { return reorient_impl(l); }

Volume load_volume(const std::string& path) {
  Volume v = load_raw(path);
  v = reorient_to_canonical(v);
  v.validate();
  return v;
}

LabelMap load_labelmap(const std::string& path) {
  Volume v = load_raw(path);
  LabelMap l(v.geom);
  for (std::size_t i = 0; i < v.data.size(); ++i) {
    float x = v.data[i];
    float r = std::round(x);
    if (std::abs(x - r) > 1e-3f) throw std::runtime_error("non-integer label value in " + path);
    if (r < 0.0f || r >= labels::kNumClasses)
      throw std::runtime_error("label out of range in " + path);
    l.data[i] = static_cast<std::uint8_t>(r);
  }
  l = reorient_to_canonical(l);
  l.validate();
  return l;
}

void save_volume(const Volume& v, const std::string& path) {
  v.validate();
  Nifti1Header h = make_header(v.geom, kDtFloat32, 32);
  write_file(path, h, v.data.data(), v.data.size() * sizeof(float));
}

void save_labelmap(const LabelMap& l, const std::string& path) {
  l.validate();  // rejects labels outside {0,1,2}
  Nifti1Header h = make_header(l.geom, kDtUint8, 8);
  write_file(path, h, l.data.data(), l.data.size());
}

}  // namespace modaseg
