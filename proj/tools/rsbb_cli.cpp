// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "rsbb/run.hpp"

namespace fs = std::filesystem;
using namespace rsbb;

namespace {

struct CommonFlags {
  std::string instance;
  std::string method = "rsbb";
  std::string set = "box";
  double size = 0.1;
  double delta = 1e-6;
  double epsilon = 1e-4;
  double tol = 1e-6;
  double time_limit = 3600.0;
  long max_nodes = 100000;
  std::string out = ".";
  std::string data_dir;
};

void add_solver_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--delta", flags.delta, "oracle feasibility tolerance");
  cmd->add_option("--epsilon", flags.epsilon, "relative fathoming tolerance");
  cmd->add_option("--tol", flags.tol, "node selection band");
  cmd->add_option("--time-limit", flags.time_limit, "wall clock limit in seconds");
  cmd->add_option("--max-nodes", flags.max_nodes, "node budget");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--data-dir", flags.data_dir, "instance directory (overrides RSBB_DATA_DIR)");
}

RunRequest to_request(const CommonFlags& flags) {
  RunRequest req;
  req.instance = flags.instance;
  req.method = method_from_string(flags.method);
  req.set_kind = set_kind_from_string(flags.set);
  req.set_size = flags.size;
  req.config.delta = flags.delta;
  req.config.epsilon = flags.epsilon;
  req.config.tol = flags.tol;
  req.config.time_limit_s = flags.time_limit;
  req.config.max_nodes = flags.max_nodes;
  req.data_dir = flags.data_dir;
  return req;
}

void write_outputs(const RunResult& result, const std::string& dir,
                   const std::string& stem) {
  fs::create_directories(dir);
  {
    std::ofstream f(fs::path(dir) / (stem + "_result.json"));
    f << result_to_json(result) << "\n";
  }
  {
    std::ofstream f(fs::path(dir) / (stem + "_trace.csv"));
    result.trace.write_csv(f);
  }
}

int exit_code(const RunResult& result) {
  switch (result.termination) {
    case Termination::Optimal: return 0;
    case Termination::TimeLimit:
    case Termination::NodeLimit: return 2;
    case Termination::RobustInfeasible: return 3;
  }
  return 2;
}

std::string cell_stem(const RunRequest& req) {
  std::string size = std::to_string(req.set_size);
  size.erase(size.find_last_not_of('0') + 1);
  if (!size.empty() && size.back() == '.') size.pop_back();
  for (auto& c : size)
    if (c == '.') c = 'p';
  return req.instance + "_" + to_string(req.method) + "_" + to_string(req.set_kind) +
         "_" + size;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust spatial branch-and-bound solver for bilinear QCQPs"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* solve = app.add_subcommand("solve", "solve one instance");
  solve->add_option("--instance", flags.instance, "instance name or file path")->required();
  solve->add_option("--method", flags.method, "rsbb|cutting|dual")
      ->check(CLI::IsMember({"rsbb", "cutting", "dual"}));
  solve->add_option("--set", flags.set, "box|ellipsoidal|polyhedral")
      ->check(CLI::IsMember({"box", "ellipsoidal", "polyhedral"}));
  solve->add_option("--size", flags.size, "uncertainty set size (0 = nominal)");
  add_solver_flags(solve, flags);

  CommonFlags sweep_flags;
  std::vector<std::string> sweep_instances;
  std::vector<std::string> sweep_sets = {"box", "ellipsoidal", "polyhedral"};
  std::vector<double> sweep_sizes = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
  int jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "solve a grid of (instance, set, size) cells");
  sweep->add_option("--instances", sweep_instances, "instance names")->required();
  sweep->add_option("--sets", sweep_sets, "set kinds");
  sweep->add_option("--sizes", sweep_sizes, "set sizes");
  sweep->add_option("--method", sweep_flags.method, "rsbb|cutting|dual")
      ->check(CLI::IsMember({"rsbb", "cutting", "dual"}));
  sweep->add_option("--jobs", jobs, "parallel workers");
  add_solver_flags(sweep, sweep_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) {
      const RunRequest req = to_request(flags);
      const RunResult result = run_solve(req);
      write_outputs(result, flags.out, cell_stem(req));
      std::cout << result_to_json(result) << "\n";
      return exit_code(result);
    }

    // Sweep: nominal anchor per instance first, then every requested cell.
    struct Cell {
      RunRequest req;
      RunResult result;
      bool failed = false;
      std::string error;
    };
    std::vector<Cell> cells;
    std::map<std::string, double> nominal;
    for (const auto& inst : sweep_instances) {
      CommonFlags f = sweep_flags;
      f.instance = inst;
      f.size = 0.0;
      RunRequest req = to_request(f);
      req.method = Method::Rsbb;
      const RunResult res = run_solve(req);
      nominal[inst] = res.objective;
      write_outputs(res, sweep_flags.out, cell_stem(req));
    }
    for (const auto& inst : sweep_instances) {
      for (const auto& set : sweep_sets) {
        for (const double size : sweep_sizes) {
          CommonFlags f = sweep_flags;
          f.instance = inst;
          f.set = set;
          f.size = size;
          cells.push_back({to_request(f), {}, false, ""});
        }
      }
    }
    std::mutex mu;
    std::size_t next = 0;
    const auto worker = [&] {
      for (;;) {
        std::size_t mine;
        {
          std::lock_guard lock(mu);
          if (next >= cells.size()) return;
          mine = next++;
        }
        try {
          cells[mine].result = run_solve(cells[mine].req);
        } catch (const std::exception& e) {
          cells[mine].failed = true;
          cells[mine].error = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::max(1, jobs); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    fs::create_directories(sweep_flags.out);
    std::ofstream nodes_csv(fs::path(sweep_flags.out) / "nodes.csv");
    std::ofstream incr_csv(fs::path(sweep_flags.out) / "increase.csv");
    nodes_csv << "instance";
    incr_csv << "instance";
    for (const auto& set : sweep_sets) {
      for (const double size : sweep_sizes) {
        nodes_csv << ',' << set << '_' << size;
        incr_csv << ',' << set << '_' << size;
      }
    }
    nodes_csv << '\n';
    incr_csv << '\n';
    std::size_t k = 0;
    int failures = 0;
    for (const auto& inst : sweep_instances) {
      nodes_csv << inst;
      incr_csv << inst;
      for (std::size_t c = 0; c < sweep_sets.size() * sweep_sizes.size(); ++c, ++k) {
        const Cell& cell = cells[k];
        if (cell.failed) {
          ++failures;
          std::cerr << "cell " << cell_stem(cell.req) << " failed: " << cell.error << "\n";
          nodes_csv << ",error";
          incr_csv << ",error";
          continue;
        }
        write_outputs(cell.result, sweep_flags.out, cell_stem(cell.req));
        nodes_csv << ',' << cell.result.nodes_explored;
        const double base = nominal[inst];
        incr_csv << ','
                 << 100.0 * (cell.result.objective - base) / std::max(1e-12, std::abs(base));
      }
      nodes_csv << '\n';
      incr_csv << '\n';
    }
    return failures == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
