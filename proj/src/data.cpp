#include "boxpolicy/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "boxpolicy/errors.hpp"

namespace boxpolicy {

namespace {

std::string row_error(std::size_t row, const std::string& what) {
  return "row " + std::to_string(row) + ": " + what;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_double(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

void append_double(std::string& out, double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

Treatment treatment_from_int(int label) {
  if (label == 1) return Treatment::kTreat;
  if (label == -1) return Treatment::kControl;
  throw DataError("treatment label must be -1 or +1, got " + std::to_string(label));
}

Dataset::Dataset(std::vector<Sample> samples, std::size_t d)
    : samples_(std::move(samples)), d_(d) {
  if (samples_.empty()) throw DataError("dataset must contain at least one sample");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (s.x.size() != d_) {
      throw DataError(row_error(i + 1, "expected " + std::to_string(d_) + " covariates"));
    }
    if (!std::all_of(s.x.begin(), s.x.end(), [](double v) { return std::isfinite(v); }) ||
        !std::isfinite(s.y)) {
      throw DataError(row_error(i + 1, "non-finite value"));
    }
  }
}

Dataset Dataset::with_flipped_treatments() const {
  auto copy = samples_;
  for (auto& s : copy) s.t = flipped(s.t);
  return Dataset(std::move(copy), d_);
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<Sample> picked;
  picked.reserve(rows.size());
  for (auto r : rows) picked.push_back(samples_.at(r));
  return Dataset(std::move(picked), d_);
}

Hyperbox::Hyperbox(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw PreconditionError("hyperbox bounds have different dimensions");
  }
  for (std::size_t t = 0; t < lower_.size(); ++t) {
    if (!(lower_[t] <= upper_[t])) {
      throw PreconditionError("hyperbox lower bound exceeds upper bound in dimension " +
                              std::to_string(t));
    }
  }
}

Hyperbox Hyperbox::point(std::span<const double> x) {
  return Hyperbox({x.begin(), x.end()}, {x.begin(), x.end()});
}

bool Hyperbox::contains(std::span<const double> x) const {
  if (x.size() != lower_.size()) throw PreconditionError("dimension mismatch in box membership");
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (x[t] < lower_[t] || x[t] > upper_[t]) return false;
  }
  return true;
}

double Hyperbox::volume() const {
  double v = 1.0;
  for (std::size_t t = 0; t < lower_.size(); ++t) v *= upper_[t] - lower_[t];
  return v;
}

void Hyperbox::expand_to(std::span<const double> x) {
  for (std::size_t t = 0; t < x.size(); ++t) {
    lower_[t] = std::min(lower_[t], x[t]);
    upper_[t] = std::max(upper_[t], x[t]);
  }
}

Dataset parse_csv(const std::string& text, bool zero_one_labels) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: missing header");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_commas(line);
  if (header.size() < 3) throw DataError("header must be x0,...,x{d-1},t,y");
  const std::size_t d = header.size() - 2;
  for (std::size_t t = 0; t < d; ++t) {
    if (trim(header[t]) != "x" + std::to_string(t)) {
      throw DataError("header column " + std::to_string(t + 1) + " must be x" + std::to_string(t));
    }
  }
  if (trim(header[d]) != "t" || trim(header[d + 1]) != "y") {
    throw DataError("header must end with t,y");
  }

  std::vector<Sample> samples;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_commas(line);
    if (cells.size() != d + 2) {
      throw DataError(row_error(row, "expected " + std::to_string(d + 2) + " columns, got " +
                                         std::to_string(cells.size())));
    }
    Sample s;
    s.x.resize(d);
    for (std::size_t t = 0; t < d; ++t) {
      if (!parse_double(cells[t], s.x[t])) {
        throw DataError(row_error(row, "non-numeric value in column x" + std::to_string(t)));
      }
    }
    double label = 0.0;
    if (!parse_double(cells[d], label)) throw DataError(row_error(row, "non-numeric treatment"));
    if (zero_one_labels) {
      if (label == 0.0) {
        s.t = Treatment::kControl;
      } else if (label == 1.0) {
        s.t = Treatment::kTreat;
      } else {
        throw DataError(row_error(row, "treatment must be 0 or 1"));
      }
    } else if (label == 1.0) {
      s.t = Treatment::kTreat;
    } else if (label == -1.0) {
      s.t = Treatment::kControl;
    } else {
      throw DataError(row_error(row, "treatment must be -1 or 1"));
    }
    if (!parse_double(cells[d + 1], s.y)) throw DataError(row_error(row, "non-numeric outcome"));
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw DataError("no data rows");
  return Dataset(std::move(samples), d);
}

Dataset load_csv(const std::filesystem::path& path, bool zero_one_labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), zero_one_labels);
}

std::string to_csv(const Dataset& data) {
  std::string out;
  for (std::size_t t = 0; t < data.d(); ++t) out += "x" + std::to_string(t) + ",";
  out += "t,y\n";
  for (const auto& s : data) {
    for (double v : s.x) {
      append_double(out, v);
      out += ',';
    }
    out += s.t == Treatment::kTreat ? "1," : "-1,";
    append_double(out, s.y);
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_csv(data);
}

IndexPartition partition(std::span<const double> psi, std::span<const Treatment> t) {
  if (psi.size() != t.size()) throw PreconditionError("psi and treatment lengths differ");
  IndexPartition part;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (psi[i] == 0.0) {
      throw PreconditionError("psi[" + std::to_string(i) + "] is zero; drop it before partitioning");
    }
    (psi[i] > 0.0 ? part.p : part.n_set).push_back(i);
    (t[i] == Treatment::kTreat ? part.i_plus : part.i_minus).push_back(i);
  }
  return part;
}

bool box_contains(const Hyperbox& box, std::span<const double> x) { return box.contains(x); }

Treatment policy_decide(const Policy& policy, std::span<const double> x) {
  if (policy.d != 0 && x.size() != policy.d) {
    throw PreconditionError("dimension mismatch in policy decision");
  }
  bool inside = false;
  for (const auto& box : policy.boxes) {
    if (box.contains(x)) {
      inside = true;
      break;
    }
  }
  const auto decision = inside ? Treatment::kTreat : Treatment::kControl;
  return policy.flipped ? flipped(decision) : decision;
}

Hyperbox span_of(const Dataset& data, std::span<const std::size_t> rows) {
  if (rows.empty()) throw PreconditionError("span of an empty sample set");
  auto box = Hyperbox::point(data[rows[0]].x);
  for (auto r : rows.subspan(1)) box.expand_to(data[r].x);
  return box;
}

Hyperbox bounding_box(const Dataset& data) {
  std::vector<std::size_t> all(data.n());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return span_of(data, all);
}

std::vector<Hyperbox> spanned_boxes(const Dataset& data, std::size_t max_n) {
  const std::size_t n = data.n();
  if (n > max_n) {
    throw PreconditionError("spanned box enumeration limited to " + std::to_string(max_n) +
                            " samples, got " + std::to_string(n));
  }
  if (n >= 63) throw PreconditionError("spanned box enumeration needs n < 63");
  // boxes[mask] = span of the subset; built from mask without its lowest bit.
  const std::uint64_t count = std::uint64_t{1} << n;
  std::vector<Hyperbox> spans(count);
  for (std::uint64_t mask = 1; mask < count; ++mask) {
    const auto low = static_cast<std::size_t>(__builtin_ctzll(mask));
    const auto rest = mask & (mask - 1);
    if (rest == 0) {
      spans[mask] = Hyperbox::point(data[low].x);
    } else {
      spans[mask] = spans[rest];
      spans[mask].expand_to(data[low].x);
    }
  }
  std::vector<Hyperbox> out(std::make_move_iterator(spans.begin() + 1),
                            std::make_move_iterator(spans.end()));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace boxpolicy
