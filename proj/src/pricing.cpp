#include "boxpolicy/pricing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <utility>

#include "boxpolicy/errors.hpp"

namespace boxpolicy {

namespace {

using Interval = std::pair<std::uint32_t, std::uint32_t>;
using Clock = std::chrono::steady_clock;

// Improvements smaller than this count as ties.
constexpr double kTieTol = 1e-13;

bool inside(const PricingInstance& in, std::size_t i, const std::vector<Interval>& iv) {
  for (std::size_t t = 0; t < iv.size(); ++t) {
    if (in.rank[i][t] < iv[t].first || in.rank[i][t] > iv[t].second) return false;
  }
  return true;
}

struct Candidate {
  double sum = 0.0;
  std::vector<std::size_t> members;  // pricing entry indices
  std::optional<Hyperbox> box;

  double volume() const { return box ? box->volume() : 0.0; }
};

Candidate evaluate(const PricingInstance& in, const std::vector<Interval>& iv) {
  Candidate c;
  for (std::size_t i = 0; i < in.n(); ++i) {
    if (!inside(in, i, iv)) continue;
    c.sum += in.coeff[i];
    c.members.push_back(i);
    if (!c.box) {
      c.box = Hyperbox::point(in.x[i]);
    } else {
      c.box->expand_to(in.x[i]);
    }
  }
  return c;
}

// True when `c` should replace `best` among equal sums: smaller volume, then
// lexicographically smaller endpoints.
bool tie_better(const Candidate& c, const Candidate& best) {
  if (!c.box) return false;
  if (!best.box) return false;  // the empty selection wins ties
  const double vc = c.volume(), vb = best.volume();
  if (vc != vb) return vc < vb;
  return *c.box < *best.box;
}

// Incumbent of a search plus the few it displaced most recently; those are
// often improving columns too.
struct Incumbents {
  static constexpr std::size_t kKeep = 4;
  Candidate best;  // starts as the empty selection
  std::vector<Candidate> displaced;

  void replace(Candidate c) {
    if (best.box) {
      if (displaced.size() == kKeep) displaced.erase(displaced.begin());
      displaced.push_back(std::move(best));
    }
    best = std::move(c);
  }
};

PricingSolution to_solution(const PricingInstance& in, const Candidate& best, bool timed_out, std::size_t nodes) {
  PricingSolution out;
  for (auto i : best.members) out.delta.push_back(in.sample[i]);
  std::sort(out.delta.begin(), out.delta.end());
  out.box = best.box;
  out.objective = best.sum - in.lambda - in.omega;
  out.reduced_cost = -out.objective;
  out.timed_out = timed_out;
  out.nodes = nodes;
  return out;
}

PricingSolution to_solution(const PricingInstance& in, const Incumbents& inc, bool timed_out, std::size_t nodes) {
  auto out = to_solution(in, inc.best, timed_out, nodes);
  for (auto it = inc.displaced.rbegin(); it != inc.displaced.rend(); ++it) {
    if (it->sum - in.lambda - in.omega > 0.0) out.runners_up.push_back(*it->box);
  }
  return out;
}

// Max-sum contiguous range over point-updated weights. Ties prefer the shorter
// range, then the leftmost.
class RangeTree {
 public:
  struct Best {
    double value;
    std::uint32_t lo, hi;
  };

  explicit RangeTree(std::size_t n) : n_(n), size_(1) {
    while (size_ < n_) size_ <<= 1;
    nodes_.resize(2 * size_);
    reset();
  }

  void reset() {
    for (std::size_t p = 0; p < size_; ++p) nodes_[size_ + p] = leaf(p, 0.0);
    for (std::size_t k = size_ - 1; k >= 1; --k) nodes_[k] = merge(nodes_[2 * k], nodes_[2 * k + 1]);
  }

  void add(std::size_t pos, double w) {
    std::size_t k = size_ + pos;
    nodes_[k] = leaf(pos, nodes_[k].sum + w);
    for (k >>= 1; k >= 1; k >>= 1) nodes_[k] = merge(nodes_[2 * k], nodes_[2 * k + 1]);
  }

  Best best() const { return nodes_[1].best; }

 private:
  struct Node {
    double sum;
    Best prefix;  // starts at the node's left edge
    Best suffix;  // ends at the node's right edge
    Best best;
  };

  static bool better(const Best& a, const Best& b) {
    if (a.value != b.value) return a.value > b.value;
    const auto la = a.hi - a.lo, lb = b.hi - b.lo;
    if (la != lb) return la < lb;
    return a.lo < b.lo;
  }

  static Node leaf(std::size_t p, double w) {
    const auto q = static_cast<std::uint32_t>(p);
    const Best b{w, q, q};
    return {w, b, b, b};
  }

  static Node merge(const Node& l, const Node& r) {
    Node out;
    out.sum = l.sum + r.sum;
    const Best ext_prefix{l.sum + r.prefix.value, l.prefix.lo, r.prefix.hi};
    out.prefix = better(ext_prefix, l.prefix) ? ext_prefix : l.prefix;
    const Best ext_suffix{r.sum + l.suffix.value, l.suffix.lo, r.suffix.hi};
    out.suffix = better(ext_suffix, r.suffix) ? ext_suffix : r.suffix;
    out.best = better(r.best, l.best) ? r.best : l.best;
    const Best cross{l.suffix.value + r.prefix.value, l.suffix.lo, r.prefix.hi};
    if (better(cross, out.best)) out.best = cross;
    return out;
  }

  std::size_t n_;
  std::size_t size_;
  std::vector<Node> nodes_;
};

class Search {
 public:
  Search(const PricingInstance& in, double time_limit)
      : in_(in), iv_(in.d, Interval{0, 0}) {
    if (std::isfinite(time_limit)) {
      deadline_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(time_limit));
    }
  }

  PricingSolution run() {
    std::vector<std::size_t> all(in_.n());
    std::iota(all.begin(), all.end(), 0);
    if (in_.d > 0 && in_.n() > 0) descend(0, all);
    return to_solution(in_, inc_, timed_out_, nodes_);
  }

 private:
  bool out_of_time() {
    if (timed_out_) return true;
    if (deadline_ && (++clock_checks_ & 0xff) == 0 && Clock::now() >= *deadline_) timed_out_ = true;
    return timed_out_;
  }

  void offer(double sum) {
    if (sum < best_.sum - kTieTol) return;
    auto c = evaluate(in_, iv_);
    if (sum > best_.sum + kTieTol) {
      inc_.replace(std::move(c));
    } else if (tie_better(c, best_)) {
      best_ = std::move(c);
    }
  }

  // Sorted distinct ranks in dimension t of the positive entries of `cand`.
  std::vector<std::uint32_t> endpoints(std::size_t t, const std::vector<std::size_t>& cand) const {
    std::vector<std::uint32_t> out;
    for (auto i : cand) {
      if (in_.coeff[i] > 0.0) out.push_back(in_.rank[i][t]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void descend(std::size_t t, std::vector<std::size_t> cand) {
    ++nodes_;
    if (out_of_time()) return;
    if (in_.d == 1) {
      line(cand);
      return;
    }
    if (t + 2 == in_.d) {
      plane(cand);
      return;
    }
    const auto ends = endpoints(t, cand);
    if (ends.empty()) return;
    std::sort(cand.begin(), cand.end(), [&](auto a, auto b) { return in_.rank[a][t] < in_.rank[b][t]; });
    std::size_t start = 0;
    for (auto a : ends) {
      while (start < cand.size() && in_.rank[cand[start]][t] < a) ++start;
      double mass = 0.0;
      std::size_t stop = start;
      for (auto b : ends) {
        if (b < a) continue;
        while (stop < cand.size() && in_.rank[cand[stop]][t] <= b) {
          if (in_.coeff[cand[stop]] > 0.0) mass += in_.coeff[cand[stop]];
          ++stop;
        }
        if (mass <= best_.sum + kTieTol) continue;
        iv_[t] = {a, b};
        descend(t + 1, std::vector<std::size_t>(cand.begin() + static_cast<std::ptrdiff_t>(start),
                                                cand.begin() + static_cast<std::ptrdiff_t>(stop)));
        if (timed_out_) return;
      }
    }
  }

  // One dimension: a single max-sum range.
  void line(const std::vector<std::size_t>& cand) {
    std::vector<std::uint32_t> pos;
    for (auto i : cand) pos.push_back(in_.rank[i][0]);
    std::sort(pos.begin(), pos.end());
    pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
    RangeTree tree(pos.size());
    for (auto i : cand) {
      tree.add(static_cast<std::size_t>(std::lower_bound(pos.begin(), pos.end(), in_.rank[i][0]) - pos.begin()),
               in_.coeff[i]);
    }
    const auto b = tree.best();
    iv_[0] = {pos[b.lo], pos[b.hi]};
    offer(b.value);
  }

  // Last two dimensions: every range in dimension u, best range in v.
  void plane(std::vector<std::size_t> cand) {
    const std::size_t u = in_.d - 2, v = in_.d - 1;
    const auto ends = endpoints(u, cand);
    if (ends.empty()) return;
    std::sort(cand.begin(), cand.end(), [&](auto a, auto b) { return in_.rank[a][u] < in_.rank[b][u]; });
    std::vector<std::uint32_t> pos;
    for (auto i : cand) pos.push_back(in_.rank[i][v]);
    std::sort(pos.begin(), pos.end());
    pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
    std::vector<std::size_t> slot(cand.size());
    for (std::size_t k = 0; k < cand.size(); ++k) {
      slot[k] = static_cast<std::size_t>(std::lower_bound(pos.begin(), pos.end(), in_.rank[cand[k]][v]) - pos.begin());
    }
    // Positive mass at or after each sorted position bounds every range starting there.
    std::vector<double> tail(cand.size() + 1, 0.0);
    for (std::size_t k = cand.size(); k-- > 0;) tail[k] = tail[k + 1] + std::max(in_.coeff[cand[k]], 0.0);

    RangeTree tree(pos.size());
    std::size_t start = 0;
    for (auto a : ends) {
      while (start < cand.size() && in_.rank[cand[start]][u] < a) ++start;
      if (tail[start] <= best_.sum + kTieTol) break;
      if (out_of_time()) return;
      ++nodes_;
      tree.reset();
      std::size_t stop = start;
      for (auto b : ends) {
        if (b < a) continue;
        while (stop < cand.size() && in_.rank[cand[stop]][u] <= b) {
          tree.add(slot[stop], in_.coeff[cand[stop]]);
          ++stop;
        }
        const auto best = tree.best();
        if (best.value < best_.sum - kTieTol) continue;
        iv_[u] = {a, b};
        iv_[v] = {pos[best.lo], pos[best.hi]};
        offer(best.value);
      }
    }
  }

  const PricingInstance& in_;
  std::vector<Interval> iv_;
  Incumbents inc_;
  Candidate& best_ = inc_.best;
  std::optional<Clock::time_point> deadline_;
  std::size_t clock_checks_ = 0;
  std::size_t nodes_ = 0;
  bool timed_out_ = false;
};

// Branch and bound over (R, U): the box must cover R and lie inside U. R is a
// per-dimension rank range, possibly empty in some dimensions; once it is set
// everywhere its entries are counted whatever their sign, which tightens the
// positive-mass bound. Excluding a positive entry p branches on the first
// dimension where the box misses p, so the children are disjoint.
class HullSearch {
 public:
  HullSearch(const PricingInstance& in, double time_limit)
      : in_(in), d_(in.d), ulo_(in.d, 0), uhi_(in.d), rlo_(in.d, kUnset), rhi_(in.d, -1), iv_(in.d) {
    for (std::size_t t = 0; t < d_; ++t) uhi_[t] = static_cast<int>(in.values[t].size()) - 1;
    if (std::isfinite(time_limit)) {
      deadline_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(time_limit));
    }
  }

  PricingSolution run() {
    std::vector<std::uint32_t> all(in_.n());
    std::iota(all.begin(), all.end(), 0);
    if (d_ > 0 && in_.n() > 0) explore(all);
    return to_solution(in_, inc_, timed_out_, nodes_);
  }

 private:
  static constexpr int kUnset = 1 << 30;

  bool out_of_time() {
    if (timed_out_) return true;
    if (deadline_ && (++clock_checks_ & 0xff) == 0 && Clock::now() >= *deadline_) timed_out_ = true;
    return timed_out_;
  }

  bool covered(std::uint32_t i) const {
    for (std::size_t t = 0; t < d_; ++t) {
      const int r = static_cast<int>(in_.rank[i][t]);
      if (r < rlo_[t] || r > rhi_[t]) return false;
    }
    return true;
  }

  void offer(double sum) {
    if (sum < best_.sum - kTieTol) return;
    for (std::size_t t = 0; t < d_; ++t) {
      iv_[t] = {static_cast<std::uint32_t>(rlo_[t]), static_cast<std::uint32_t>(rhi_[t])};
    }
    auto c = evaluate(in_, iv_);
    if (sum > best_.sum + kTieTol) {
      inc_.replace(std::move(c));
    } else if (tie_better(c, best_)) {
      best_ = std::move(c);
    }
  }

  void explore(const std::vector<std::uint32_t>& pts) {
    ++nodes_;
    if (out_of_time()) return;
    double pos = 0.0, neg_in = 0.0, in_sum = 0.0;
    bool any_in = false;
    std::uint32_t pick = 0;
    double pick_c = 0.0;
    for (auto i : pts) {
      const double c = in_.coeff[i];
      if (c > 0.0) pos += c;
      if (covered(i)) {
        any_in = true;
        in_sum += c;
        if (c < 0.0) neg_in += c;
      } else if (c > pick_c) {
        pick_c = c;
        pick = i;
      }
    }
    if (any_in) offer(in_sum);
    if (pos + neg_in <= best_.sum + kTieTol || pick_c == 0.0) return;

    const auto saved_lo = rlo_, saved_hi = rhi_;
    // Include the pick.
    for (std::size_t t = 0; t < d_; ++t) widen(t, static_cast<int>(in_.rank[pick][t]));
    explore(pts);
    rlo_ = saved_lo;
    rhi_ = saved_hi;

    // Exclude it: branch on the first dimension where the box misses it.
    std::vector<std::uint32_t> sub;
    for (std::size_t t = 0; t < d_ && !timed_out_; ++t) {
      const int r = static_cast<int>(in_.rank[pick][t]);
      if (r > rhi_[t]) {  // box ends below r; always so while the range is unset
        const int keep = uhi_[t];
        uhi_[t] = r - 1;
        if (uhi_[t] >= ulo_[t]) {
          sub.clear();
          for (auto i : pts) {
            if (static_cast<int>(in_.rank[i][t]) < r) sub.push_back(i);
          }
          explore(sub);
        }
        uhi_[t] = keep;
      }
      if (timed_out_) break;
      if (r < rlo_[t]) {  // box starts above r
        const int keep = ulo_[t];
        ulo_[t] = r + 1;
        if (ulo_[t] <= uhi_[t]) {
          sub.clear();
          for (auto i : pts) {
            if (static_cast<int>(in_.rank[i][t]) > r) sub.push_back(i);
          }
          explore(sub);
        }
        ulo_[t] = keep;
      }
      widen(t, r);  // later branches cover the pick in dimension t
    }
    rlo_ = saved_lo;
    rhi_ = saved_hi;
  }

  void widen(std::size_t t, int r) {
    rlo_[t] = std::min(rlo_[t], r);
    rhi_[t] = std::max(rhi_[t], r);
  }

  const PricingInstance& in_;
  std::size_t d_;
  std::vector<int> ulo_, uhi_, rlo_, rhi_;
  std::vector<Interval> iv_;
  Incumbents inc_;
  Candidate& best_ = inc_.best;
  std::optional<Clock::time_point> deadline_;
  std::size_t clock_checks_ = 0;
  std::size_t nodes_ = 0;
  bool timed_out_ = false;
};

}  // namespace

PricingInstance make_pricing_instance(std::size_t d, const std::vector<std::vector<double>>& x,
                                      const std::vector<double>& coeff, const std::vector<std::size_t>& sample,
                                      double lambda, double omega) {
  if (x.size() != coeff.size() || sample.size() != coeff.size()) {
    throw PreconditionError("pricing inputs have mismatched lengths");
  }
  if (!(lambda >= 0.0) || !(omega >= 0.0)) throw PreconditionError("lambda and omega must be nonnegative");
  PricingInstance in;
  in.d = d;
  in.lambda = lambda;
  in.omega = omega;
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    if (std::abs(coeff[i]) < kZeroCoefficient) continue;
    if (x[i].size() != d) throw PreconditionError("pricing point has wrong dimension");
    in.sample.push_back(sample[i]);
    in.coeff.push_back(coeff[i]);
    in.x.push_back(x[i]);
  }
  in.values.resize(d);
  in.rank.assign(in.n(), std::vector<std::uint32_t>(d));
  for (std::size_t t = 0; t < d; ++t) {
    auto& vals = in.values[t];
    for (const auto& p : in.x) vals.push_back(p[t]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t i = 0; i < in.n(); ++i) {
      in.rank[i][t] = static_cast<std::uint32_t>(std::lower_bound(vals.begin(), vals.end(), in.x[i][t]) - vals.begin());
    }
  }
  return in;
}

PricingInstance build_pricing(const PolicyInstance& instance, const MasterDuals& duals, double omega) {
  const auto n = instance.n();
  const auto sums = duals.pair_sums(n);
  std::vector<std::vector<double>> x;
  std::vector<double> coeff;
  std::vector<std::size_t> sample;
  for (std::size_t i = 0; i < n; ++i) {
    double c = 0.0;
    switch (instance.cls[i]) {
      case SampleClass::kTreatedPositive: c = duals.mu1.empty() ? 0.0 : duals.mu1[i]; break;
      case SampleClass::kUntreatedNegative: c = duals.mu4.empty() ? 0.0 : duals.mu4[i]; break;
      default: c = -sums[i]; break;
    }
    x.push_back(instance.data[i].x);
    coeff.push_back(c);
    sample.push_back(i);
  }
  return make_pricing_instance(instance.d(), x, coeff, sample, duals.lambda, omega);
}

PricingSolution solve_pricing(const PricingInstance& instance, double time_limit_seconds) {
  // The interval descent is quick in one or two dimensions; beyond that the
  // hull search prunes far better.
  if (instance.d >= 3) return HullSearch(instance, time_limit_seconds).run();
  return Search(instance, time_limit_seconds).run();
}

PricingSolution solve_pricing_bruteforce(const PricingInstance& in, std::size_t guard) {
  double count = 1.0;
  for (const auto& vals : in.values) {
    const double k = static_cast<double>(vals.size());
    count *= k * (k + 1.0) / 2.0;
  }
  if (in.n() > 0 && count > static_cast<double>(guard)) {
    throw PreconditionError("brute-force pricing would enumerate " + std::to_string(count) + " boxes");
  }
  Candidate best;
  std::size_t visited = 0;
  if (in.n() > 0 && in.d > 0) {
    std::vector<Interval> iv(in.d, Interval{0, 0});
    // Odometer over interval tuples in lexicographic order.
    while (true) {
      ++visited;
      double sum = 0.0;
      for (std::size_t i = 0; i < in.n(); ++i) {
        if (inside(in, i, iv)) sum += in.coeff[i];
      }
      if (sum > best.sum + kTieTol) best = evaluate(in, iv);
      std::size_t t = in.d;
      while (t-- > 0) {
        const auto last = static_cast<std::uint32_t>(in.values[t].size() - 1);
        if (iv[t].second < last) {
          ++iv[t].second;
          break;
        }
        if (iv[t].first < last) {
          ++iv[t].first;
          iv[t].second = iv[t].first;
          break;
        }
        iv[t] = {0, 0};
      }
      if (t == static_cast<std::size_t>(-1)) break;
    }
  }
  return to_solution(in, best, false, visited);
}

double pricing_value(const PricingInstance& in, const Hyperbox& box) {
  double sum = 0.0;
  for (std::size_t i = 0; i < in.n(); ++i) {
    if (box.contains(in.x[i])) sum += in.coeff[i];
  }
  return sum - in.lambda - in.omega;
}

}  // namespace boxpolicy
