// Command-line front end: single runs and parameter sweeps.

#include "uavslice/uavslice.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace uavslice;
using nlohmann::json;

namespace {

Scenario load_scenario(const std::string& path) {
  if (path.empty()) return default_scenario();
  std::ifstream in(path);
  if (!in) throw config_error("cannot open scenario file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw config_error(path + ": " + e.what());
  }
  return scenario_from_json(j);
}

// sets a dotted key such as "lyapunov.V" in the scenario document
Scenario with_param(const Scenario& s, const std::string& key, const std::string& value) {
  json j = to_json(s);
  json* node = &j;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  for (std::size_t k = 0; k + 1 < parts.size(); ++k) node = &(*node)[parts[k]];
  json v;
  try {
    v = json::parse(value);
  } catch (const json::exception&) {
    v = value;
  }
  (*node)[parts.back()] = v;
  return scenario_from_json(j, s);
}

void report(const RunMetrics& m, const std::string& label) {
  const auto& s = m.summary;
  std::printf("%-28s EE=%.6g jain=%.4f S=(%.3g, %.3g, %.3g) invalid=%d urllc_infeasible=%d %.1fs\n",
              label.c_str(), s.energy_efficiency, s.jain, s.final_s_q, s.final_s_z, s.final_s_h,
              s.invalid_slots, s.urllc_infeasible_slots, s.runtime_s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV network slicing simulator"};
  app.require_subcommand(1);

  std::string scenario_path, algo = "re2fs", out = "out";
  std::uint64_t seed = 0;
  int horizon = 0, users = 0, uavs = 0;
  std::vector<std::string> params;
  std::vector<std::string> algos{"re2fs", "suav", "cct"};
  std::vector<std::uint64_t> seeds{1};

  auto add_common = [&](CLI::App* c) {
    c->add_option("--scenario", scenario_path, "Scenario JSON file")->check(CLI::ExistingFile);
    c->add_option("--out", out, "Output directory");
    c->add_option("--horizon", horizon, "Number of slots T");
    c->add_option("--users", users, "Number of MBB users");
    c->add_option("--uavs", uavs, "Number of UAVs");
  };

  auto* run_cmd = app.add_subcommand("run", "Run one simulation");
  add_common(run_cmd);
  run_cmd->add_option("--seed", seed, "Random seed");
  run_cmd->add_option("--algo", algo, "re2fs, suav or cct")
      ->check(CLI::IsMember({"re2fs", "suav", "cct"}));
  run_cmd->add_option("--param", params, "Override key=value (dotted keys)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter over values, seeds and algorithms");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--param", params, "key=v1,v2,... (one swept key)")->required();
  sweep_cmd->add_option("--seeds", seeds, "Seeds")->delimiter(',');
  sweep_cmd->add_option("--algos", algos, "Algorithms")->delimiter(',');

  auto* dump_cmd = app.add_subcommand("default-scenario", "Print the default scenario");

  CLI11_PARSE(app, argc, argv);

  try {
    Scenario base = load_scenario(scenario_path);
    if (horizon > 0) base.horizon = horizon;
    if (users > 0) base.n_users = users;
    if (uavs > 0) base.n_uavs = uavs;

    if (*dump_cmd) {
      std::cout << to_json(base).dump(2) << "\n";
      return 0;
    }

    if (*run_cmd) {
      if (run_cmd->count("--seed")) base.seed = seed;
      base.algorithm = algorithm_from_string(algo);
      for (const auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos) throw config_error("--param expects key=value: " + p);
        base = with_param(base, p.substr(0, eq), p.substr(eq + 1));
      }
      check_scenario(base);
      const auto m = run(base);
      write_outputs(m, out);
      report(m, to_string(base.algorithm));
      return 0;
    }

    // sweep
    if (params.size() != 1) throw config_error("sweep takes exactly one --param");
    const auto eq = params[0].find('=');
    if (eq == std::string::npos) throw config_error("--param expects key=v1,v2,...");
    const std::string key = params[0].substr(0, eq);
    std::vector<std::string> values;
    {
      std::stringstream ss(params[0].substr(eq + 1));
      std::string v;
      while (std::getline(ss, v, ',')) values.push_back(v);
    }
    json table = json::array();
    for (const auto& v : values) {
      for (auto sd : seeds) {
        Scenario s = with_param(base, key, v);
        s.seed = sd;
        check_scenario(s);
        const World w = make_world(s);
        const Pretrained pt = pretrain_cgnets(s, w.map);
        for (const auto& a : algos) {
          s.algorithm = algorithm_from_string(a);
          const auto m = run(s, &pt, &w);
          const std::string label = key + "=" + v + "/seed=" + std::to_string(sd) + "/" + a;
          write_outputs(m, std::filesystem::path(out) / (key + "_" + v) /
                               ("seed_" + std::to_string(sd)) / a);
          report(m, label);
          json row = summary_json(m);
          row["param"] = key;
          row["value"] = v;
          table.push_back(row);
        }
      }
    }
    std::filesystem::create_directories(out);
    std::ofstream(std::filesystem::path(out) / "sweep.json") << table.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
