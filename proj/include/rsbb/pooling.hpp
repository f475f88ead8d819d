// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "rsbb/expr.hpp"
#include "rsbb/uncertainty.hpp"

namespace rsbb {

struct PoolingFeed {
  std::string name;
  double cost = 0.0;
  double availability = 0.0;
  std::map<std::string, double> quality;       // nominal C_ik
  std::map<std::string, double> perturbation;  // optional explicit C^_ik
};

struct PoolingPoolSpec {
  std::string name;
  double capacity = 0.0;
};

struct PoolingProduct {
  std::string name;
  double price = 0.0;
  double demand = 0.0;
  std::map<std::string, double> quality_lower;
  std::map<std::string, double> quality_upper;
};

struct PoolingInstance {
  std::string name;
  std::vector<PoolingFeed> feeds;
  std::vector<PoolingPoolSpec> pools;
  std::vector<PoolingProduct> products;
  std::vector<std::string> qualities;               // ordered union of keys
  std::vector<std::pair<int, int>> feed_pool_arcs;  // (feed, pool)
  std::vector<std::pair<int, int>> pool_product_arcs;
  std::vector<std::pair<int, int>> feed_product_arcs;  // direct bypass
};

/// Parses the JSON instance schema; throws std::invalid_argument naming the
/// offending field on schema or invariant violations.
PoolingInstance parse_instance(const std::string& json_text);
PoolingInstance load_instance_file(const std::string& path);

/// How the quality perturbation magnitudes C^_ik are chosen.
enum class PerturbationMode {
  Equal,     // C^_ik = C_ik
  FromFile,  // explicit per-feed values (absent keys mean 0)
};

struct PqModel {
  QcqpProblem problem;

  std::map<std::pair<int, int>, int> q_index;               // (i,l)
  std::map<std::pair<int, int>, int> y_index;               // (l,j)
  std::map<std::pair<int, int>, int> z_index;               // (i,j)
  std::vector<int> f_index;                                 // per product
  std::map<std::tuple<int, int, int>, int> v_index;         // (i,l,j)
  int first_epigraph_var = -1;                              // dual counterpart

  /// Model-size counters matching the usual reporting convention: the f_j
  /// layer is excluded from the variable count and each two-sided quality
  /// row counts once.
  struct Stats {
    int variables = 0;
    int qp_equations = 0;
    int lp_equations = 0;
  };
  Stats stats;
};

/// pq-formulation with uncertain quality rows (one xi group per quality,
/// indexed by feed).
PqModel build_pq(const PoolingInstance& instance,
                 PerturbationMode mode = PerturbationMode::Equal);

/// Deterministic robust counterpart: quality rows carry their dual rho terms
/// instead of uncertainty (box and polyhedral sets only).
PqModel build_dual_counterpart(const PoolingInstance& instance,
                               const UncertaintySet& set,
                               PerturbationMode mode = PerturbationMode::Equal);

/// The xi dimension shared by every quality group: one component per feed.
int pooling_xi_dim(const PoolingInstance& instance);

}  // namespace rsbb
