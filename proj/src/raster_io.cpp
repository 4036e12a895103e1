#include "hybviton/raster_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

namespace hybviton {
namespace {

struct NetpbmHeader {
  char kind = 0;  // '5' or '6'
  Index width = 0;
  Index height = 0;
  std::size_t data_offset = 0;
};

void skip_space_and_comments(const std::string& b, std::size_t& pos) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(b[pos]))) {
      ++pos;
    } else {
      break;
    }
  }
}

long read_header_int(const std::string& b, std::size_t& pos) {
  skip_space_and_comments(b, pos);
  if (pos >= b.size() || !std::isdigit(static_cast<unsigned char>(b[pos]))) {
    throw IoError("netpbm: malformed header");
  }
  long v = 0;
  while (pos < b.size() && std::isdigit(static_cast<unsigned char>(b[pos]))) {
    v = v * 10 + (b[pos] - '0');
    if (v > 1'000'000) throw IoError("netpbm: header value too large");
    ++pos;
  }
  return v;
}

NetpbmHeader parse_header(const std::string& b) {
  if (b.size() < 2 || b[0] != 'P' || (b[1] != '5' && b[1] != '6')) {
    throw IoError("netpbm: not a binary P5/P6 raster");
  }
  NetpbmHeader h;
  h.kind = b[1];
  std::size_t pos = 2;
  h.width = read_header_int(b, pos);
  h.height = read_header_int(b, pos);
  const long maxval = read_header_int(b, pos);
  if (maxval != 255) throw IoError("netpbm: only 8-bit rasters (maxval 255) are supported");
  if (pos >= b.size() || !std::isspace(static_cast<unsigned char>(b[pos]))) {
    throw IoError("netpbm: malformed header");
  }
  h.data_offset = pos + 1;
  const std::size_t channels = h.kind == '6' ? 3 : 1;
  const auto expected = static_cast<std::size_t>(h.width * h.height) * channels;
  if (b.size() - h.data_offset < expected) throw IoError("netpbm: truncated pixel data");
  return h;
}

std::string header(char kind, Index width, Index height) {
  std::ostringstream os;
  os << 'P' << kind << '\n' << width << ' ' << height << "\n255\n";
  return os.str();
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(v * 255.0)); }

Plane<std::uint8_t> decode_gray(const std::string& bytes) {
  const NetpbmHeader h = parse_header(bytes);
  if (h.kind != '5') throw IoError("expected a single-channel (P5) raster, got RGB");
  Plane<std::uint8_t> out(h.height, h.width);
  const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data() + h.data_offset);
  for (Index i = 0; i < h.height; ++i)
    for (Index j = 0; j < h.width; ++j) out(i, j) = p[i * h.width + j];
  return out;
}

std::string encode_gray(const Plane<std::uint8_t>& plane) {
  std::string out = header('5', plane.cols(), plane.rows());
  out.reserve(out.size() + static_cast<std::size_t>(plane.size()));
  for (Index i = 0; i < plane.rows(); ++i)
    for (Index j = 0; j < plane.cols(); ++j) out.push_back(static_cast<char>(plane(i, j)));
  return out;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  AtomicFileBatch batch;
  batch.add(path, bytes);
  batch.commit();
}

AtomicFileBatch::~AtomicFileBatch() {
  std::error_code ec;
  for (const auto& p : staged_) std::filesystem::remove(p, ec);
}

void AtomicFileBatch::add(std::filesystem::path path, std::string bytes) {
  entries_.push_back({std::move(path), std::move(bytes)});
}

void AtomicFileBatch::commit() {
  std::vector<std::filesystem::path> temps;
  for (const auto& e : entries_) {
    auto tmp = e.path;
    tmp += ".tmp";
    staged_.push_back(tmp);
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(e.bytes.data(), static_cast<std::streamsize>(e.bytes.size()));
    out.close();
    if (!out) throw IoError("cannot write " + tmp.string());
    temps.push_back(tmp);
  }
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    std::error_code ec;
    std::filesystem::rename(temps[k], entries_[k].path, ec);
    if (ec) throw IoError("cannot rename into " + entries_[k].path.string() + ": " + ec.message());
  }
  staged_.clear();
  entries_.clear();
}

RasterImage decode_image(const std::string& bytes) {
  const NetpbmHeader h = parse_header(bytes);
  if (h.kind != '6') throw IoError("expected an RGB (P6) raster, got single-channel");
  std::array<Plane<double>, 3> planes;
  for (auto& p : planes) p.resize(h.height, h.width);
  const auto* p = reinterpret_cast<const std::uint8_t*>(bytes.data() + h.data_offset);
  for (Index i = 0; i < h.height; ++i) {
    for (Index j = 0; j < h.width; ++j) {
      for (int c = 0; c < 3; ++c) planes[c](i, j) = p[(i * h.width + j) * 3 + c] / 255.0;
    }
  }
  return RasterImage(std::move(planes));
}

BinaryMask decode_mask(const std::string& bytes, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("mask threshold must lie in (0,1)");
  const Plane<std::uint8_t> gray = decode_gray(bytes);
  Plane<std::uint8_t> bits(gray.rows(), gray.cols());
  for (Index i = 0; i < gray.rows(); ++i)
    for (Index j = 0; j < gray.cols(); ++j) bits(i, j) = gray(i, j) / 255.0 >= threshold ? 1 : 0;
  return BinaryMask(std::move(bits));
}

std::string encode_image(const RasterImage& img) {
  std::string out = header('6', img.width(), img.height());
  out.reserve(out.size() + static_cast<std::size_t>(img.width() * img.height() * 3));
  for (Index i = 0; i < img.height(); ++i)
    for (Index j = 0; j < img.width(); ++j)
      for (int c = 0; c < 3; ++c) out.push_back(static_cast<char>(to_byte(img(i, j, c))));
  return out;
}

std::string encode_mask(const BinaryMask& mask) {
  return encode_gray((mask.data() * std::uint8_t(255)).eval());
}

std::string encode_segmentation(const SegmentationMap& seg) {
  if (seg.label_count() > 256) throw IoError("label maps are limited to 256 labels");
  return encode_gray(seg.labels().cast<std::uint8_t>());
}

RasterImage load_image(const std::filesystem::path& path) {
  try {
    return decode_image(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

BinaryMask load_mask(const std::filesystem::path& path, double threshold) {
  try {
    return decode_mask(read_file(path), threshold);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

SegmentationMap load_segmentation(const std::filesystem::path& path, int label_count) {
  try {
    return SegmentationMap(decode_gray(read_file(path)).cast<int>(), label_count);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void save_image(const RasterImage& img, const std::filesystem::path& path) {
  write_file_atomic(path, encode_image(img));
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  write_file_atomic(path, encode_mask(mask));
}

void save_segmentation(const SegmentationMap& seg, const std::filesystem::path& path) {
  write_file_atomic(path, encode_segmentation(seg));
}

}  // namespace hybviton
