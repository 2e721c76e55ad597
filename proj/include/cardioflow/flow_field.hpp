#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <iterator>
#include <ostream>
#include <string>
#include <vector>

#include "cardioflow/errors.hpp"
#include "cardioflow/grid.hpp"

namespace cardioflow::flow {

/// Dense per-pixel displacement in pixels: pixel P maps to P + (fx(P), fy(P)).
struct FlowField {
  Image fx;
  Image fy;

  FlowField() = default;
  FlowField(int width, int height) : fx(width, height, 0.0), fy(width, height, 0.0) {}

  int width() const noexcept { return fx.width(); }
  int height() const noexcept { return fx.height(); }
  std::size_t size() const noexcept { return fx.size(); }

  Vec2 at(int x, int y) const { return {fx(x, y), fy(x, y)}; }

  bool all_finite() const {
    for (std::size_t i = 0; i < size(); ++i) {
      if (!std::isfinite(fx[i]) || !std::isfinite(fy[i])) return false;
    }
    return true;
  }

  friend bool operator==(const FlowField&, const FlowField&) = default;
};

/// Image value at P + F(P), bilinear with clamped sampling coordinates.
inline double warp_sample(const Image& image, const FlowField& flow, int x, int y) {
  if (!image.contains(x, y) || !flow.fx.contains(x, y)) {
    throw DomainError("warp_sample: pixel (" + std::to_string(x) + "," + std::to_string(y) + ") out of bounds");
  }
  return sample_bilinear(image, x + flow.fx(x, y), y + flow.fy(x, y)).value;
}

/// Pulls `image` back onto the source grid: out(P) = image(P + F(P)).
inline Image warp_image(const Image& image, const FlowField& flow) {
  if (!image.same_shape(flow.fx)) throw DomainError("warp_image: flow and image dimensions differ");
  Image out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) out(x, y) = warp_sample(image, flow, x, y);
  }
  return out;
}

/// Endpoint error |F(P) - G(P)| at one pixel.
inline double endpoint_error(const FlowField& a, const FlowField& b, int x, int y) {
  return std::hypot(a.fx(x, y) - b.fx(x, y), a.fy(x, y) - b.fy(x, y));
}

// ---------------------------------------------------------------------------
// CFL1 binary format: "CFL1", u32 width, u32 height (little endian), then the
// fx grid and the fy grid as little-endian float32, row-major.

inline constexpr std::array<char, 4> kFlowMagic = {'C', 'F', 'L', '1'};

namespace detail {

inline void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

}  // namespace detail

inline std::vector<char> encode_flow(const FlowField& flow) {
  std::vector<char> out;
  out.reserve(12 + 8 * flow.size());
  out.insert(out.end(), kFlowMagic.begin(), kFlowMagic.end());
  detail::put_u32(out, static_cast<std::uint32_t>(flow.width()));
  detail::put_u32(out, static_cast<std::uint32_t>(flow.height()));
  for (const Image* g : {&flow.fx, &flow.fy}) {
    for (double v : g->values()) detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  return out;
}

inline FlowField decode_flow(const std::vector<char>& bytes) {
  if (bytes.size() < 12 || !std::equal(kFlowMagic.begin(), kFlowMagic.end(), bytes.begin())) {
    throw FormatError("flow file: bad magic (expected CFL1)");
  }
  const std::uint32_t w = detail::get_u32(bytes.data() + 4);
  const std::uint32_t h = detail::get_u32(bytes.data() + 8);
  const std::uint64_t expected = 12 + 8ull * w * h;
  if (w > 1u << 15 || h > 1u << 15 || bytes.size() != expected) {
    throw FormatError("flow file: size " + std::to_string(bytes.size()) + " does not match header " +
                      std::to_string(w) + "x" + std::to_string(h));
  }
  FlowField flow(static_cast<int>(w), static_cast<int>(h));
  const char* p = bytes.data() + 12;
  for (Image* g : {&flow.fx, &flow.fy}) {
    for (double& v : g->values()) {
      v = std::bit_cast<float>(detail::get_u32(p));
      p += 4;
    }
  }
  return flow;
}

inline void write_flow(std::ostream& os, const FlowField& flow) {
  const auto bytes = encode_flow(flow);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline FlowField read_flow(std::istream& is) {
  std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_flow(bytes);
}

}  // namespace cardioflow::flow
