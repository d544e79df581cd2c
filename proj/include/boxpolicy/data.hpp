#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace boxpolicy {

// Treatment assignment. The numeric value is the {-1,+1} label used in all
// score formulas.
enum class Treatment : int8_t { kControl = -1, kTreat = 1 };

constexpr int as_int(Treatment t) { return static_cast<int>(t); }
constexpr double as_real(Treatment t) { return static_cast<double>(t); }
constexpr Treatment flipped(Treatment t) {
  return t == Treatment::kTreat ? Treatment::kControl : Treatment::kTreat;
}
Treatment treatment_from_int(int label);

struct Sample {
  std::vector<double> x;
  Treatment t = Treatment::kControl;
  double y = 0.0;  // lower is better
};

class Dataset {
 public:
  Dataset() = default;
  // Validates that every sample has dimension `d` with finite entries.
  Dataset(std::vector<Sample> samples, std::size_t d);

  std::size_t n() const { return samples_.size(); }
  std::size_t d() const { return d_; }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  const std::vector<Sample>& samples() const { return samples_; }

  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

  // Copy with every treatment label negated.
  Dataset with_flipped_treatments() const;
  // Copy restricted to the listed rows, in the listed order.
  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  std::vector<Sample> samples_;
  std::size_t d_ = 0;
};

// Axis-aligned closed box [lower_0, upper_0] x ... x [lower_{d-1}, upper_{d-1}].
class Hyperbox {
 public:
  Hyperbox() = default;
  Hyperbox(std::vector<double> lower, std::vector<double> upper);

  // Degenerate box at a single point.
  static Hyperbox point(std::span<const double> x);

  std::size_t d() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  // Closed-interval membership in every dimension.
  bool contains(std::span<const double> x) const;
  // Product of side lengths.
  double volume() const;
  // Smallest box containing both this box and `x`.
  void expand_to(std::span<const double> x);

  friend bool operator==(const Hyperbox&, const Hyperbox&) = default;
  friend auto operator<=>(const Hyperbox&, const Hyperbox&) = default;

 private:
  std::vector<double> lower_;
  std::vector<double> upper_;
};

// Treat iff x lies in any box; the label flip negates the final decision.
struct Policy {
  std::vector<Hyperbox> boxes;
  bool flipped = false;
  std::size_t d = 0;
};

struct IndexPartition {
  std::vector<std::size_t> i_plus;   // T = +1
  std::vector<std::size_t> i_minus;  // T = -1
  std::vector<std::size_t> p;        // psi > 0
  std::vector<std::size_t> n_set;    // psi < 0
};

// Reads `x0,...,x{d-1},t,y`. Errors name the 1-based data row.
Dataset load_csv(const std::filesystem::path& path, bool zero_one_labels = false);
Dataset parse_csv(const std::string& text, bool zero_one_labels = false);
// Writes the same layout with shortest round-trip decimal formatting.
std::string to_csv(const Dataset& data);
void write_csv(const Dataset& data, const std::filesystem::path& path);

IndexPartition partition(std::span<const double> psi, std::span<const Treatment> t);

bool box_contains(const Hyperbox& box, std::span<const double> x);
Treatment policy_decide(const Policy& policy, std::span<const double> x);

// Span of the listed samples.
Hyperbox span_of(const Dataset& data, std::span<const std::size_t> rows);
// Every distinct box spanned by a non-empty subset of samples.
std::vector<Hyperbox> spanned_boxes(const Dataset& data, std::size_t max_n = 14);
// Box spanning every sample.
Hyperbox bounding_box(const Dataset& data);

}  // namespace boxpolicy
