#include "boxpolicy/render.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "boxpolicy/errors.hpp"

namespace boxpolicy {

namespace {

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Shortest text that reads back as the same double.
std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string feature(const PolicyDocument& doc, std::size_t t) {
  return doc.feature_names ? (*doc.feature_names)[t] : "x" + std::to_string(t);
}

// Conjunction terms for one box, skipping dimensions that span the observed
// range. A box spanning it everywhere keeps all terms so the rule stays explicit.
std::vector<std::string> terms(const PolicyDocument& doc, const Hyperbox& box) {
  std::vector<std::string> all, kept;
  for (std::size_t t = 0; t < doc.d; ++t) {
    auto term = feature(doc, t) + " in [" + fixed2(box.lower()[t]) + ", " + fixed2(box.upper()[t]) + "]";
    const bool full = doc.observed && box.lower()[t] <= doc.observed->lower()[t] &&
                      box.upper()[t] >= doc.observed->upper()[t];
    if (!full) kept.push_back(term);
    all.push_back(std::move(term));
  }
  return kept.empty() ? all : kept;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t k = 0; k < parts.size(); ++k) out += (k ? sep : "") + parts[k];
  return out;
}

const char* inside_label(const PolicyDocument& doc) { return doc.flipped ? "-1" : "+1"; }
const char* outside_label(const PolicyDocument& doc) { return doc.flipped ? "+1" : "-1"; }

}  // namespace

std::string render_text(const PolicyDocument& doc) {
  if (doc.boxes.empty()) return std::string("ALWAYS: assign ") + outside_label(doc) + "\n";
  std::string out;
  for (std::size_t k = 0; k < doc.boxes.size(); ++k) {
    out += (k ? "ELSE IF " : "IF ") + join(terms(doc, doc.boxes[k]), " AND ") + " THEN " + inside_label(doc) + "\n";
  }
  return out + "ELSE " + outside_label(doc) + "\n";
}

std::string render_dot(const PolicyDocument& doc) {
  std::ostringstream out;
  out << "digraph policy {\n  rankdir=TB;\n";
  out << "  fallback [shape=ellipse, label=\"assign " << outside_label(doc) << "\"];\n";
  if (!doc.boxes.empty()) {
    out << "  treat [shape=ellipse, label=\"assign " << inside_label(doc) << "\"];\n";
  }
  const auto k = doc.boxes.size();
  for (std::size_t j = 0; j < k; ++j) {
    out << "  rule_" << j + 1 << " [shape=box, label=\"" << join(terms(doc, doc.boxes[j]), "\\nAND ") << "\"];\n";
  }
  for (std::size_t j = 0; j < k; ++j) {
    out << "  rule_" << j + 1 << " -> treat [label=\"yes\"];\n";
    out << "  rule_" << j + 1 << " -> " << (j + 1 < k ? "rule_" + std::to_string(j + 2) : std::string("fallback"))
        << " [label=\"no\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string render_grid(const PolicyDocument& doc, const Hyperbox& region, std::size_t points, std::size_t guard) {
  if (region.d() != doc.d) throw PreconditionError("grid region dimension does not match the policy");
  if (points == 0) throw PreconditionError("grid needs at least one point per dimension");
  const double rows = std::pow(static_cast<double>(points), static_cast<double>(doc.d));
  if (rows > static_cast<double>(guard)) throw PreconditionError("grid would have " + fixed2(rows) + " rows");

  std::ostringstream out;
  for (std::size_t t = 0; t < doc.d; ++t) out << feature(doc, t) << ',';
  out << "decision\n";
  const auto policy = doc.policy();
  std::vector<std::size_t> idx(doc.d, 0);
  std::vector<double> x(doc.d);
  while (true) {
    for (std::size_t t = 0; t < doc.d; ++t) {
      const double lo = region.lower()[t], hi = region.upper()[t];
      x[t] = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(idx[t]) / static_cast<double>(points - 1);
      out << shortest(x[t]) << ',';
    }
    out << as_int(policy_decide(policy, x)) << '\n';
    std::size_t t = doc.d;
    while (t-- > 0) {
      if (++idx[t] < points) break;
      idx[t] = 0;
    }
    if (t == static_cast<std::size_t>(-1)) break;
  }
  return out.str();
}

}  // namespace boxpolicy
