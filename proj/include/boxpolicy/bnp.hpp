#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "boxpolicy/data.hpp"
#include "boxpolicy/lp.hpp"
#include "boxpolicy/master.hpp"
#include "boxpolicy/pricing.hpp"
#include "boxpolicy/scores.hpp"

namespace boxpolicy {

struct BnPConfig {
  std::size_t m_max = 1;
  double omega = 0.0;
  std::size_t max_nodes = 50;
  double pricing_time_limit = kDefaultPricingTimeLimit;
  std::size_t cg_max_rounds = 500;
  double tol = 1e-9;
  bool flip = false;
  // Budget for each restricted integer solve and for the whole fit.
  double milp_time_limit = kInf;
  double time_limit = kInf;
  // When the boxes spanned by the retained samples number at most this many
  // candidate interval tuples, column generation ends with an exhaustive
  // certificate so node bounds are exact. 0 disables.
  std::size_t certify_guard = 200000;
  // Boxes added to W0; when there are at most m_max of them their union is
  // the starting incumbent. Seeding with a smaller-M fit keeps results nested.
  std::vector<Hyperbox> warm_start;

  void validate() const;
};

enum class FitStatus { kOptimal, kNodeLimit, kTimeLimit };
const char* to_string(FitStatus status);

struct NodeRecord {
  std::size_t node = 0;
  double relaxed = 0.0;
  double incumbent = 0.0;  // +inf before the first incumbent
  std::size_t columns_added = 0;
};

struct FitResult {
  Policy policy;
  bool has_incumbent = false;
  double objective = 0.0;            // J_n of the policy over retained samples
  double penalized_objective = 0.0;  // objective + omega * box count
  double relaxation_bound = 0.0;     // root relaxed value
  std::size_t nodes_explored = 0;
  std::size_t columns_generated = 0;
  FitStatus status = FitStatus::kOptimal;
  bool pricing_timed_out = false;
  bool round_limit_hit = false;
  bool milp_timed_out = false;
  bool certified = false;  // every node's relaxation was certified optimal
  std::size_t certificate_columns = 0;
  std::vector<NodeRecord> progress;
};

struct CgResult {
  MasterSolution solution;
  std::size_t rounds = 0;
  std::size_t columns_added = 0;
  bool round_limit_hit = false;
  bool pricing_timed_out = false;
  bool duplicate_column = false;
  std::size_t certificate_columns = 0;
  PricingSolution last_pricing;
};

// Every box spanned by retained samples, one per distinct membership.
class BoxUniverse {
 public:
  // Empty (not enumerable) when the interval tuples exceed `guard`.
  static BoxUniverse build(const PolicyInstance& instance, std::size_t guard);

  bool enumerable() const { return enumerable_; }
  std::size_t size() const { return boxes_.size(); }
  const std::vector<Hyperbox>& boxes() const { return boxes_; }
  const std::vector<std::vector<std::size_t>>& members() const { return members_; }

  // Box outside the working set (by membership) of minimum reduced cost when
  // pair rows of unrealized columns carry zero duals:
  //   omega + lambda - sum of mu1 / mu4 over its members.
  // Returns the index and that reduced cost, or nothing when all are in W.
  std::optional<std::pair<std::size_t, double>> price(const MasterProblem& problem, const MasterDuals& duals) const;

 private:
  bool enumerable_ = false;
  std::vector<Hyperbox> boxes_;
  std::vector<std::vector<std::size_t>> members_;
};

// Alternates relaxed master solves and pricing until no column has reduced
// cost below -tol. New boxes are appended to the problem's working set.
// With a universe, a final certificate round over it follows pricing; any
// box it finds is added and pricing resumes.
CgResult column_generation(MasterProblem& problem, const BnPConfig& config, const BoxUniverse* universe = nullptr);

// Fractional column of largest volume; ties go to the value nearest 0.5, then
// the lowest index. Throws PreconditionError when nothing is fractional.
std::size_t branch_select(const MasterSolution& solution, const std::vector<Hyperbox>& working_set, double tol);

using ProgressSink = std::function<void(const NodeRecord&)>;

FitResult fit(const Dataset& dataset, const ScoreVector& scores, const BnPConfig& config,
              const ProgressSink& progress = {});

}  // namespace boxpolicy
