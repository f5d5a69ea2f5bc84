// cachenet experiment driver.
//
//   cachenet run <config.json>        execute the configured sweep, write CSVs
//   cachenet validate <config.json>   check a config without running anything
//   cachenet solve-che <rates.csv> <cache_size>
//   cachenet window <epsilon> <conf> [--method chebyshev|clt]
//
// Exit codes: 0 ok, 1 config error, 2 run error, 3 numeric non-convergence.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cachenet/analytics.hpp"
#include "cachenet/config.hpp"
#include "cachenet/experiment.hpp"
#include "cachenet/window.hpp"

namespace {

std::vector<double> load_rates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cachenet::ConfigError("cannot read popularity file: " + path);
  std::vector<double> rates;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    // accept either "rate" or "rank,rate" lines
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double a, b;
    if (ss >> a) {
      if (ss >> b)
        rates.push_back(b);
      else
        rates.push_back(a);
    }
  }
  if (rates.empty()) throw cachenet::ConfigError("no rates in " + path);
  return rates;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cache-network simulation and analysis toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run the configured experiment sweep");
  run_cmd->add_option("config", config_path, "experiment config (JSON)")->required();

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "validate a config file");
  validate_cmd->add_option("config", validate_path, "experiment config (JSON)")
      ->required();

  std::string rates_path;
  double che_size = 0.0;
  auto* che_cmd = app.add_subcommand("solve-che", "solve the characteristic cache time");
  che_cmd->add_option("rates", rates_path, "per-content request rates (CSV)")->required();
  che_cmd->add_option("size", che_size, "cache size (items)")->required();

  double w_eps = 0.0, w_conf = 0.0;
  std::string w_method = "clt";
  auto* window_cmd = app.add_subcommand("window", "compute an observation window length");
  window_cmd->add_option("epsilon", w_eps, "acceptable error")->required();
  window_cmd->add_option("conf", w_conf, "confidence percentage")->required();
  window_cmd->add_option("--method", w_method, "chebyshev or clt (default clt)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      auto config = cachenet::load_config(config_path);
      if (const char* dir = std::getenv("CACHENET_OUTPUT_DIR")) config.output_dir = dir;
      cachenet::run_experiment(config);
      std::cout << "wrote results to " << config.output_dir << '\n';
    } else if (*validate_cmd) {
      auto config = cachenet::load_config(validate_path);
      auto issues = config.validate();
      if (issues.empty()) {
        std::cout << "ok\n";
      } else {
        for (const auto& i : issues) std::cerr << i << '\n';
        return 1;
      }
    } else if (*che_cmd) {
      auto rates = load_rates(rates_path);
      auto sol = cachenet::che_characteristic_time(che_size, rates);
      if (sol.saturated) {
        std::cout << "saturated: cache size >= content count\n";
      } else {
        if (sol.residual >= 1e-9) {
          std::cerr << "solver residual " << sol.residual << " above tolerance\n";
          return 3;
        }
        std::cout << "T = " << cachenet::format_number(sol.characteristic_time)
                  << " residual = " << cachenet::format_number(sol.residual)
                  << " iterations = " << sol.iterations << '\n';
      }
    } else if (*window_cmd) {
      std::int64_t w = (w_method == "chebyshev")
                           ? cachenet::chebyshev_window(w_eps, w_conf)
                           : cachenet::clt_window(w_eps, w_conf);
      std::cout << w << '\n';
    }
  } catch (const cachenet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const cachenet::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const cachenet::RunError& e) {
    std::cerr << "run error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "run error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
