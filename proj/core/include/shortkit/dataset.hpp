#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace shortkit::data {

enum class AttributeKind { kContinuous, kBinary };

/// Bookkeeping for the colored square of a synthetic binary-attribute image.
/// Keeps the square's overlay separate from the underlying signal+noise so a
/// counterfactual flip can rebuild both channels bit-exactly.
struct SquareOverlay {
  int row = 0;
  int col = 0;
  int channel = 0;  // 0 = red, 1 = green
  std::vector<double> base0;    // signal+noise under the square, channel 0
  std::vector<double> base1;    // same, channel 1
  std::vector<double> overlay;  // square intensity incl. its own noise
};

struct Example {
  std::int64_t id = 0;
  int label = 0;       // Y
  double attribute = 0.0;  // A (0/1 when binary)
  std::vector<double> features;
  std::optional<SquareOverlay> square;
};

struct Dataset {
  AttributeKind attribute_kind = AttributeKind::kContinuous;
  int image_side = 0;  // 0 for tabular data
  int square_side = 0;
  std::vector<Example> examples;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  int feature_dim() const {
    return examples.empty() ? 0 : static_cast<int>(examples.front().features.size());
  }

  std::vector<int> labels() const {
    std::vector<int> y;
    y.reserve(examples.size());
    for (const auto& e : examples) y.push_back(e.label);
    return y;
  }
  std::vector<double> attributes() const {
    std::vector<double> a;
    a.reserve(examples.size());
    for (const auto& e : examples) a.push_back(e.attribute);
    return a;
  }
};

}  // namespace shortkit::data
