// SPDX-License-Identifier: Apache-2.0

#include "rsbb/pooling.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rsbb {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument("pooling instance: " + where + ": " + what);
}

std::map<std::string, double> parse_quality_map(const json& j, const std::string& where) {
  std::map<std::string, double> out;
  if (!j.is_object()) fail(where, "expected an object of quality values");
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) fail(where + "." + k, "expected a number");
    out[k] = v.get<double>();
  }
  return out;
}

int index_of(const std::vector<std::string>& names, const std::string& name,
             const std::string& where) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) fail(where, "unknown name '" + name + "'");
  return static_cast<int>(it - names.begin());
}

std::vector<std::pair<int, int>> parse_arcs(const json& arcs, const char* key,
                                            const std::vector<std::string>& from,
                                            const std::vector<std::string>& to,
                                            bool dense_default) {
  std::vector<std::pair<int, int>> out;
  if (!arcs.contains(key)) {
    if (dense_default) {
      for (int a = 0; a < static_cast<int>(from.size()); ++a)
        for (int b = 0; b < static_cast<int>(to.size()); ++b) out.push_back({a, b});
    }
    return out;
  }
  const auto& list = arcs.at(key);
  if (!list.is_array()) fail(std::string("arcs.") + key, "expected an array");
  for (const auto& pair : list) {
    if (!pair.is_array() || pair.size() != 2) fail(std::string("arcs.") + key, "expected [from, to] pairs");
    out.push_back({index_of(from, pair[0].get<std::string>(), key),
                   index_of(to, pair[1].get<std::string>(), key)});
  }
  return out;
}

}  // namespace

PoolingInstance parse_instance(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail("json", e.what());
  }

  PoolingInstance inst;
  inst.name = root.value("name", "");

  if (!root.contains("feeds") || root["feeds"].empty()) fail("feeds", "no feeds");
  if (!root.contains("products") || root["products"].empty()) fail("products", "no products");

  std::set<std::string> quality_keys;
  for (std::size_t i = 0; i < root["feeds"].size(); ++i) {
    const auto& f = root["feeds"][i];
    const std::string where = "feeds[" + std::to_string(i) + "]";
    PoolingFeed feed;
    feed.name = f.value("name", "feed" + std::to_string(i));
    if (!f.contains("cost")) fail(where + ".cost", "missing");
    feed.cost = f["cost"].get<double>();
    if (!f.contains("availability")) fail(where + ".availability", "missing");
    feed.availability = f["availability"].get<double>();
    if (feed.availability < 0) fail(where + ".availability", "negative");
    if (!f.contains("quality")) fail(where + ".quality", "missing");
    feed.quality = parse_quality_map(f["quality"], where + ".quality");
    if (f.contains("perturbation")) {
      feed.perturbation = parse_quality_map(f["perturbation"], where + ".perturbation");
      for (const auto& [k, v] : feed.perturbation) {
        if (v < 0) fail(where + ".perturbation." + k, "must be nonnegative");
      }
    }
    for (const auto& [k, v] : feed.quality) quality_keys.insert(k);
    inst.feeds.push_back(std::move(feed));
  }

  if (root.contains("pools")) {
    for (std::size_t l = 0; l < root["pools"].size(); ++l) {
      const auto& p = root["pools"][l];
      const std::string where = "pools[" + std::to_string(l) + "]";
      PoolingPoolSpec pool;
      pool.name = p.value("name", "pool" + std::to_string(l));
      if (!p.contains("capacity")) fail(where + ".capacity", "missing");
      pool.capacity = p["capacity"].get<double>();
      if (pool.capacity < 0) fail(where + ".capacity", "negative");
      inst.pools.push_back(std::move(pool));
    }
  }

  for (std::size_t j = 0; j < root["products"].size(); ++j) {
    const auto& p = root["products"][j];
    const std::string where = "products[" + std::to_string(j) + "]";
    PoolingProduct prod;
    prod.name = p.value("name", "product" + std::to_string(j));
    if (!p.contains("price")) fail(where + ".price", "missing");
    prod.price = p["price"].get<double>();
    if (!p.contains("demand")) fail(where + ".demand", "missing");
    prod.demand = p["demand"].get<double>();
    if (prod.demand < 0) fail(where + ".demand", "negative");
    if (!p.contains("quality_upper")) fail(where + ".quality_upper", "missing");
    prod.quality_upper = parse_quality_map(p["quality_upper"], where + ".quality_upper");
    if (p.contains("quality_lower"))
      prod.quality_lower = parse_quality_map(p["quality_lower"], where + ".quality_lower");
    for (const auto& [k, lo] : prod.quality_lower) {
      const auto up = prod.quality_upper.find(k);
      if (up != prod.quality_upper.end() && lo > up->second) {
        fail(where + ".quality_lower." + k, "exceeds quality_upper");
      }
      quality_keys.insert(k);
    }
    for (const auto& [k, v] : prod.quality_upper) quality_keys.insert(k);
    inst.products.push_back(std::move(prod));
  }

  inst.qualities.assign(quality_keys.begin(), quality_keys.end());

  std::vector<std::string> feed_names, pool_names, product_names;
  for (const auto& f : inst.feeds) feed_names.push_back(f.name);
  for (const auto& p : inst.pools) pool_names.push_back(p.name);
  for (const auto& p : inst.products) product_names.push_back(p.name);

  const json arcs = root.contains("arcs") ? root["arcs"] : json::object();
  inst.feed_pool_arcs = parse_arcs(arcs, "feed_to_pool", feed_names, pool_names, true);
  inst.pool_product_arcs =
      parse_arcs(arcs, "pool_to_product", pool_names, product_names, true);
  inst.feed_product_arcs =
      parse_arcs(arcs, "feed_to_product", feed_names, product_names, !root.contains("arcs"));

  return inst;
}

PoolingInstance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open instance file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  PoolingInstance inst = parse_instance(ss.str());
  if (inst.name.empty()) {
    auto slash = path.find_last_of('/');
    auto base = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = base.find_last_of('.');
    inst.name = dot == std::string::npos ? base : base.substr(0, dot);
  }
  return inst;
}

int pooling_xi_dim(const PoolingInstance& instance) {
  return static_cast<int>(instance.feeds.size());
}

namespace {

double chat(const PoolingInstance& inst, int feed, const std::string& quality,
            PerturbationMode mode) {
  const auto& f = inst.feeds[feed];
  if (mode == PerturbationMode::Equal) {
    const auto it = f.quality.find(quality);
    return it == f.quality.end() ? 0.0 : it->second;
  }
  const auto it = f.perturbation.find(quality);
  return it == f.perturbation.end() ? 0.0 : it->second;
}

double cnom(const PoolingInstance& inst, int feed, const std::string& quality) {
  const auto it = inst.feeds[feed].quality.find(quality);
  return it == inst.feeds[feed].quality.end() ? 0.0 : it->second;
}

PqModel build_core(const PoolingInstance& inst, PerturbationMode mode,
                   const UncertaintySet* dual_set) {
  PqModel m;
  QcqpProblem& p = m.problem;
  const int nI = static_cast<int>(inst.feeds.size());
  const int nL = static_cast<int>(inst.pools.size());
  const int nJ = static_cast<int>(inst.products.size());

  // q_il over feed->pool arcs.
  for (const auto& [i, l] : inst.feed_pool_arcs) {
    m.q_index[{i, l}] =
        p.add_variable("q(" + inst.feeds[i].name + "," + inst.pools[l].name + ")", 0.0, 1.0);
  }
  // y_lj over pool->product arcs.
  for (const auto& [l, j] : inst.pool_product_arcs) {
    const double ub = std::min(inst.pools[l].capacity, inst.products[j].demand);
    m.y_index[{l, j}] =
        p.add_variable("y(" + inst.pools[l].name + "," + inst.products[j].name + ")", 0.0, ub);
  }
  // z_ij over direct arcs.
  for (const auto& [i, j] : inst.feed_product_arcs) {
    const double ub = std::min(inst.feeds[i].availability, inst.products[j].demand);
    m.z_index[{i, j}] =
        p.add_variable("z(" + inst.feeds[i].name + "," + inst.products[j].name + ")", 0.0, ub);
  }
  // f_j.
  for (int j = 0; j < nJ; ++j) {
    m.f_index.push_back(p.add_variable("f(" + inst.products[j].name + ")", 0.0,
                                       inst.products[j].demand));
  }
  // v_ilj for arc-consistent triples.
  for (const auto& [i, l] : inst.feed_pool_arcs) {
    for (const auto& [l2, j] : inst.pool_product_arcs) {
      if (l2 != l) continue;
      const double ub = std::min({inst.feeds[i].availability, inst.pools[l].capacity,
                                  inst.products[j].demand});
      m.v_index[{i, l, j}] =
          p.add_variable("v(" + inst.feeds[i].name + "," + inst.pools[l].name + "," +
                             inst.products[j].name + ")",
                         0.0, ub);
    }
  }

  // Objective: feed cost through pools and directs minus product revenue.
  for (const auto& [ilj, col] : m.v_index) {
    p.objective.add_linear(col, inst.feeds[std::get<0>(ilj)].cost);
  }
  for (const auto& [ij, col] : m.z_index) {
    p.objective.add_linear(col, inst.feeds[ij.first].cost - inst.products[ij.second].price);
  }
  for (const auto& [lj, col] : m.y_index) {
    p.objective.add_linear(col, -inst.products[lj.second].price);
  }

  // Availability per feed.
  for (int i = 0; i < nI; ++i) {
    QuadExpr row;
    for (const auto& [ilj, col] : m.v_index)
      if (std::get<0>(ilj) == i) row.add_linear(col, 1.0);
    for (const auto& [ij, col] : m.z_index)
      if (ij.first == i) row.add_linear(col, 1.0);
    row.add_constant(-inst.feeds[i].availability);
    if (!row.linear().empty()) p.add_inequality(row, "avail(" + inst.feeds[i].name + ")");
  }
  // Pool capacity.
  for (int l = 0; l < nL; ++l) {
    QuadExpr row;
    for (const auto& [lj, col] : m.y_index)
      if (lj.first == l) row.add_linear(col, 1.0);
    row.add_constant(-inst.pools[l].capacity);
    if (!row.linear().empty()) p.add_inequality(row, "cap(" + inst.pools[l].name + ")");
  }
  // Demand per product.
  for (int j = 0; j < nJ; ++j) {
    QuadExpr row;
    for (const auto& [lj, col] : m.y_index)
      if (lj.second == j) row.add_linear(col, 1.0);
    for (const auto& [ij, col] : m.z_index)
      if (ij.second == j) row.add_linear(col, 1.0);
    row.add_constant(-inst.products[j].demand);
    if (!row.linear().empty()) p.add_inequality(row, "demand(" + inst.products[j].name + ")");
  }
  // Pool balance per (l,j) arc: sum_i v_ilj = y_lj.
  for (const auto& [lj, ycol] : m.y_index) {
    QuadExpr row;
    for (const auto& [ilj, vcol] : m.v_index)
      if (std::get<1>(ilj) == lj.first && std::get<2>(ilj) == lj.second)
        row.add_linear(vcol, 1.0);
    row.add_linear(ycol, -1.0);
    p.add_equality(row, "balance(" + inst.pools[lj.first].name + "," +
                            inst.products[lj.second].name + ")");
  }
  // Total flow f_j.
  for (int j = 0; j < nJ; ++j) {
    QuadExpr row;
    for (const auto& [lj, col] : m.y_index)
      if (lj.second == j) row.add_linear(col, 1.0);
    for (const auto& [ij, col] : m.z_index)
      if (ij.second == j) row.add_linear(col, 1.0);
    row.add_linear(m.f_index[j], -1.0);
    p.add_equality(row, "flow(" + inst.products[j].name + ")");
  }
  // v_ilj = q_il * y_lj.
  for (const auto& [ilj, vcol] : m.v_index) {
    const auto [i, l, j] = ilj;
    QuadExpr row;
    row.add_linear(vcol, 1.0);
    row.add_bilinear(m.q_index.at({i, l}), m.y_index.at({l, j}), -1.0);
    p.add_equality(row, "vdef(" + inst.feeds[i].name + "," + inst.pools[l].name + "," +
                            inst.products[j].name + ")");
  }
  // pq RLT rows: sum_j v_ilj <= S_l q_il and sum_i q_il = 1.
  for (const auto& [il, qcol] : m.q_index) {
    QuadExpr row;
    for (const auto& [ilj, vcol] : m.v_index)
      if (std::get<0>(ilj) == il.first && std::get<1>(ilj) == il.second)
        row.add_linear(vcol, 1.0);
    row.add_linear(qcol, -inst.pools[il.second].capacity);
    p.add_inequality(row, "rlt(" + inst.feeds[il.first].name + "," +
                              inst.pools[il.second].name + ")");
  }
  for (int l = 0; l < nL; ++l) {
    QuadExpr row;
    for (const auto& [il, qcol] : m.q_index)
      if (il.second == l) row.add_linear(qcol, 1.0);
    if (row.linear().empty()) continue;
    row.add_constant(-1.0);
    p.add_equality(row, "proportion(" + inst.pools[l].name + ")");
  }

  // Quality rows. Base uses nominal C_ik; the uncertain build attaches one
  // perturbation term per feed, the dual build adds rho rows instead.
  int quality_pairs = 0;
  for (int j = 0; j < nJ; ++j) {
    for (std::size_t kk = 0; kk < inst.qualities.size(); ++kk) {
      const std::string& quality = inst.qualities[kk];
      const auto up = inst.products[j].quality_upper.find(quality);
      const auto lo = inst.products[j].quality_lower.find(quality);
      const bool has_up = up != inst.products[j].quality_upper.end();
      const bool has_lo = lo != inst.products[j].quality_lower.end();
      if (!has_up && !has_lo) continue;
      ++quality_pairs;

      // Quality mass reaching product j: sum_il C v + sum_i C z.
      QuadExpr mass;
      for (const auto& [ilj, vcol] : m.v_index)
        if (std::get<2>(ilj) == j)
          mass.add_linear(vcol, cnom(inst, std::get<0>(ilj), quality));
      for (const auto& [ij, zcol] : m.z_index)
        if (ij.second == j) mass.add_linear(zcol, cnom(inst, ij.first, quality));

      // Per-feed perturbation expressions C^_ik (sum_l v_ilj + z_ij).
      std::vector<std::pair<int, QuadExpr>> pert;
      for (int i = 0; i < nI; ++i) {
        const double ch = chat(inst, i, quality, mode);
        if (ch <= 0.0) continue;
        QuadExpr e;
        for (const auto& [ilj, vcol] : m.v_index)
          if (std::get<0>(ilj) == i && std::get<2>(ilj) == j) e.add_linear(vcol, ch);
        for (const auto& [ij, zcol] : m.z_index)
          if (ij.first == i && ij.second == j) e.add_linear(zcol, ch);
        if (!e.linear().empty()) pert.emplace_back(i, std::move(e));
      }

      const auto make_side = [&](bool upper) {
        UncertainConstraint uc;
        uc.group_id = static_cast<int>(kk);
        uc.name = std::string(upper ? "qual_up(" : "qual_lo(") +
                  inst.products[j].name + "," + quality + ")";
        if (upper) {
          uc.base = mass;
          uc.base.add_linear(m.f_index[j], -up->second);
          uc.perturbation_terms = pert;
        } else {
          uc.base = mass.negated();
          uc.base.add_linear(m.f_index[j], lo->second);
          for (const auto& [i, e] : pert) uc.perturbation_terms.emplace_back(i, e.negated());
        }
        return uc;
      };

      if (dual_set == nullptr) {
        if (has_up) p.uncertain_constraints.push_back(make_side(true));
        if (has_lo) p.uncertain_constraints.push_back(make_side(false));
      } else {
        // Deterministic counterpart rows carrying the worst-case margin.
        for (const bool upper : {true, false}) {
          if ((upper && !has_up) || (!upper && !has_lo)) continue;
          UncertainConstraint uc = make_side(upper);
          int epigraph = -1;
          if (dual_set->kind == SetKind::Polyhedral && !uc.perturbation_terms.empty()) {
            double t_ub = 0.0;
            for (const auto& [i, e] : uc.perturbation_terms) {
              double hi = e.constant();
              for (const auto& [col, c] : e.linear())
                hi += std::max(c * p.box.lower[col], c * p.box.upper[col]);
              t_ub = std::max(t_ub, std::abs(hi));
            }
            epigraph = p.add_variable("t(" + uc.name + ")", 0.0, t_ub);
            if (m.first_epigraph_var < 0) m.first_epigraph_var = epigraph;
          }
          const DualRows rows = dual_rho_rows(uc, *dual_set, p.box, epigraph);
          for (std::size_t r = 0; r < rows.rows.size(); ++r) {
            p.add_inequality(rows.rows[r], uc.name + "/rho" + std::to_string(r));
          }
        }
      }
    }
  }

  for (std::size_t kk = 0; kk < inst.qualities.size(); ++kk) {
    p.xi_group_dims[static_cast<int>(kk)] = nI;
  }

  // Reporting counts (f layer excluded, two-sided quality rows once).
  const int n_v = static_cast<int>(m.v_index.size());
  m.stats.variables = static_cast<int>(m.q_index.size() + m.y_index.size() +
                                       m.z_index.size()) + n_v;
  m.stats.qp_equations = nI + nL + nJ + static_cast<int>(m.y_index.size()) +
                         quality_pairs + n_v + nL +
                         static_cast<int>(m.q_index.size());
  m.stats.lp_equations = m.stats.qp_equations + 3 * n_v;
  return m;
}

}  // namespace

PqModel build_pq(const PoolingInstance& instance, PerturbationMode mode) {
  return build_core(instance, mode, nullptr);
}

PqModel build_dual_counterpart(const PoolingInstance& instance,
                               const UncertaintySet& set, PerturbationMode mode) {
  if (set.kind == SetKind::Ellipsoidal) throw EllipsoidalNotRepresentableError();
  return build_core(instance, mode, &set);
}

}  // namespace rsbb
