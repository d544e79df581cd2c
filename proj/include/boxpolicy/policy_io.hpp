#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "boxpolicy/data.hpp"

namespace boxpolicy {

inline constexpr int kPolicyFormatVersion = 1;

// Serialized form of a fitted policy. The optional fields beyond the core ones
// record how the scores were built and the training data's bounding box, so
// `eval` can recompute J_n and text rendering can drop uninformative bounds.
struct PolicyDocument {
  int format_version = kPolicyFormatVersion;
  std::size_t d = 0;
  std::string method = "dr";
  std::size_t m_max = 0;
  double omega = 0.0;
  bool flipped = false;
  double objective = 0.0;
  std::vector<Hyperbox> boxes;
  std::optional<std::vector<std::string>> feature_names;
  std::optional<std::string> nuisance;
  std::optional<bool> scale_psi;
  std::optional<Hyperbox> observed;

  Policy policy() const;
};

// Throws DataError on malformed input or mismatched dimensions.
PolicyDocument parse_policy_json(const std::string& text);
PolicyDocument load_policy(const std::string& path);

// Two-space indented JSON with a trailing newline; doubles print in shortest
// round-trip form, so parse followed by serialize reproduces the bytes.
std::string to_json(const PolicyDocument& doc);
void save_policy(const PolicyDocument& doc, const std::string& path);

}  // namespace boxpolicy
