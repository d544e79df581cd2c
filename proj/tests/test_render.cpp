#include <cctype>
#include <random>
#include <regex>
#include <sstream>

#include "boxpolicy/errors.hpp"
#include "boxpolicy/render.hpp"
#include "doctest.h"

using namespace boxpolicy;

namespace {

PolicyDocument doc_with(std::vector<Hyperbox> boxes, std::size_t d, bool flipped = false) {
  PolicyDocument doc;
  doc.d = d;
  doc.m_max = boxes.size();
  doc.flipped = flipped;
  doc.boxes = std::move(boxes);
  return doc;
}

// Minimal DOT grammar: `digraph ID { stmt* }`, where a statement is a node or
// an edge with an optional attribute list, or a graph attribute `ID=ID;`.
class DotChecker {
 public:
  explicit DotChecker(const std::string& text) : s_(text) {}

  bool valid() {
    if (!keyword("digraph")) return false;
    if (!id()) return false;
    if (!punct('{')) return false;
    while (true) {
      skip();
      if (pos_ < s_.size() && s_[pos_] == '}') break;
      if (!statement()) return false;
    }
    ++pos_;
    skip();
    return pos_ == s_.size();
  }

  std::size_t nodes() const { return nodes_; }
  std::size_t edges() const { return edges_; }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool punct(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  bool keyword(const std::string& k) {
    skip();
    if (s_.compare(pos_, k.size(), k) != 0) return false;
    pos_ += k.size();
    return true;
  }
  bool id() {
    skip();
    if (pos_ >= s_.size()) return false;
    if (s_[pos_] == '"') {
      for (++pos_; pos_ < s_.size(); ++pos_) {
        if (s_[pos_] == '\\') {
          ++pos_;
        } else if (s_[pos_] == '"') {
          ++pos_;
          return true;
        }
      }
      return false;
    }
    const auto start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    return pos_ > start;
  }
  bool attrs() {
    if (!punct('[')) return true;
    while (true) {
      if (punct(']')) return true;
      if (!id() || !punct('=') || !id()) return false;
      punct(',');
    }
  }
  bool statement() {
    if (!id()) return false;
    if (punct('=')) return id() && punct(';');
    skip();
    if (s_.compare(pos_, 2, "->") == 0) {
      pos_ += 2;
      if (!id()) return false;
      ++edges_;
    } else {
      ++nodes_;
    }
    return attrs() && punct(';');
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  std::size_t nodes_ = 0, edges_ = 0;
};

}  // namespace

TEST_CASE("text rendering") {
  CHECK(render_text(doc_with({}, 2)) == "ALWAYS: assign -1\n");
  CHECK(render_text(doc_with({}, 2, true)) == "ALWAYS: assign +1\n");

  const auto one = doc_with({Hyperbox({0.0, 0.0}, {1.0, 1.0})}, 2);
  CHECK(render_text(one) == "IF x0 in [0.00, 1.00] AND x1 in [0.00, 1.00] THEN +1\nELSE -1\n");
  auto flipped = one;
  flipped.flipped = true;
  CHECK(render_text(flipped) == "IF x0 in [0.00, 1.00] AND x1 in [0.00, 1.00] THEN -1\nELSE +1\n");

  // Dimensions spanning the observed range drop out; feature names replace x_t.
  auto two = doc_with({Hyperbox({-1.0, 0.25}, {1.0, 0.5}), Hyperbox({0.0, -1.0}, {0.2, 1.0})}, 2);
  two.observed = Hyperbox({-1.0, -1.0}, {1.0, 1.0});
  two.feature_names = std::vector<std::string>{"age", "dose"};
  CHECK(render_text(two) == "IF dose in [0.25, 0.50] THEN +1\nELSE IF age in [0.00, 0.20] THEN +1\nELSE -1\n");
  auto whole = doc_with({Hyperbox({-1.0}, {1.0})}, 1);
  whole.observed = Hyperbox({-1.0}, {1.0});
  CHECK(render_text(whole) == "IF x0 in [-1.00, 1.00] THEN +1\nELSE -1\n");
}

TEST_CASE("printed rules reproduce the decisions") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> cents(-100, 100);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::regex term(R"(x(\d+) in \[(-?[0-9.]+), (-?[0-9.]+)\])");
  for (int rep = 0; rep < 20; ++rep) {
    // Bounds on a 0.01 grid print exactly at two decimals.
    std::vector<Hyperbox> boxes;
    for (int k = 0; k < 1 + rep % 3; ++k) {
      std::vector<double> lo(2), hi(2);
      for (int t = 0; t < 2; ++t) {
        int a = cents(rng), b = cents(rng);
        if (rep % 4 == 0 && t == 1) a = -100, b = 100;
        lo[t] = std::min(a, b) / 100.0;
        hi[t] = std::max(a, b) / 100.0;
      }
      boxes.push_back(Hyperbox(lo, hi));
    }
    auto doc = doc_with(boxes, 2, rep % 2 == 1);
    doc.observed = Hyperbox({-1.0, -1.0}, {1.0, 1.0});
    const auto text = render_text(doc);

    // Interpret the text: each rule line is a conjunction of closed intervals.
    std::vector<std::vector<std::tuple<int, double, double>>> rules;
    std::istringstream lines(text);
    std::string line;
    int then_value = 0, else_value = 0;
    while (std::getline(lines, line)) {
      if (line.rfind("ELSE ", 0) == 0 && line.find(" THEN ") == std::string::npos) {
        else_value = std::stoi(line.substr(5));
        continue;
      }
      std::vector<std::tuple<int, double, double>> conj;
      for (std::sregex_iterator it(line.begin(), line.end(), term), end; it != end; ++it) {
        conj.emplace_back(std::stoi((*it)[1]), std::stod((*it)[2]), std::stod((*it)[3]));
      }
      then_value = std::stoi(line.substr(line.find(" THEN ") + 6));
      rules.push_back(conj);
    }
    REQUIRE(rules.size() == boxes.size());
    for (int k = 0; k < 50; ++k) {
      const std::vector<double> x{u(rng), u(rng)};
      int decision = else_value;
      for (const auto& conj : rules) {
        bool in = true;
        for (const auto& [t, lo, hi] : conj) in = in && x[t] >= lo && x[t] <= hi;
        if (in) {
          decision = then_value;
          break;
        }
      }
      CHECK(decision == as_int(policy_decide(doc.policy(), x)));
    }
  }
}

TEST_CASE("dot rendering") {
  for (std::size_t k = 0; k <= 4; ++k) {
    std::vector<Hyperbox> boxes;
    for (std::size_t j = 0; j < k; ++j) boxes.push_back(Hyperbox({double(j), 0.0}, {double(j) + 0.5, 1.0}));
    const auto dot = render_dot(doc_with(boxes, 2));
    DotChecker check(dot);
    REQUIRE(check.valid());
    CHECK(check.nodes() == (k == 0 ? 1 : k + 2));
    CHECK(check.edges() == 2 * k);
    for (std::size_t j = 1; j <= k; ++j) CHECK(dot.find("rule_" + std::to_string(j) + " [") != std::string::npos);
  }
  CHECK_FALSE(DotChecker("digraph g { a -> ; }").valid());
}

TEST_CASE("grid rendering") {
  const auto doc = doc_with({Hyperbox({0.0, 0.0}, {1.0, 1.0})}, 2);
  const auto csv = render_grid(doc, Hyperbox({-1.0, -1.0}, {1.0, 1.0}), 3);
  CHECK(csv ==
        "x0,x1,decision\n"
        "-1,-1,-1\n-1,0,-1\n-1,1,-1\n"
        "0,-1,-1\n0,0,1\n0,1,1\n"
        "1,-1,-1\n1,0,1\n1,1,1\n");
  CHECK_THROWS_AS(render_grid(doc, Hyperbox({0.0}, {1.0}), 3), PreconditionError);
  CHECK_THROWS_AS(render_grid(doc, Hyperbox({0.0, 0.0}, {1.0, 1.0}), 2000), PreconditionError);
}

TEST_CASE("policy json round trip") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t d = 1 + rep % 4;
    PolicyDocument doc;
    doc.d = d;
    doc.method = rep % 3 == 0 ? "ips" : "dr";
    doc.m_max = 1 + rep % 5;
    doc.omega = rep % 2 ? u(rng) * u(rng) + 9.0 : 0.0;
    doc.flipped = rep % 2 == 0;
    doc.objective = u(rng) / 7.0;
    for (std::size_t k = 0; k < doc.m_max && rep % 7 != 0; ++k) {
      std::vector<double> lo(d), hi(d);
      for (std::size_t t = 0; t < d; ++t) {
        const double a = u(rng), b = u(rng);
        lo[t] = std::min(a, b);
        hi[t] = std::max(a, b);
      }
      doc.boxes.push_back(Hyperbox(lo, hi));
    }
    if (rep % 3 == 1) {
      doc.feature_names = std::vector<std::string>(d, "f\"q");
      doc.nuisance = "exact:basic";
      doc.scale_psi = true;
      doc.observed = Hyperbox(std::vector<double>(d, -3.0), std::vector<double>(d, 3.0));
    }
    const auto text = to_json(doc);
    const auto back = parse_policy_json(text);
    CHECK(to_json(back) == text);
    CHECK(back.boxes == doc.boxes);
    CHECK(back.objective == doc.objective);
    CHECK(back.omega == doc.omega);
  }
  CHECK_THROWS_AS(parse_policy_json("{"), DataError);
  CHECK_THROWS_AS(parse_policy_json(R"({"format_version": 2})"), DataError);
  auto bad = to_json(doc_with({Hyperbox({0.0, 0.0}, {1.0, 1.0})}, 2));
  bad.replace(bad.find("\"d\": 2"), 6, "\"d\": 3");
  CHECK_THROWS_AS(parse_policy_json(bad), DataError);
}
