#include <exception>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcf/config.hpp"
#include "mcf/driver.hpp"

namespace {

// Remaining tokens are free-form "--key value" overrides for any config key.
void apply_overrides(mcf::RunConfig& config, const std::vector<std::string>& extras) {
  for (std::size_t i = 0; i < extras.size(); i += 2) {
    const std::string& flag = extras[i];
    if (flag.rfind("--", 0) != 0) throw std::invalid_argument("expected --key value, got '" + flag + "'");
    if (i + 1 >= extras.size()) throw std::invalid_argument("missing value for '" + flag + "'");
    mcf::apply_key_value(config, flag.substr(2), extras[i + 1]);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mean curvature flow of closed surfaces by evolving finite elements"};
  app.allow_extras();

  std::string command;
  std::string config_file;
  bool print_config = false;
  app.add_option("command", command, "sphere-convergence | dumbbell | mesh-gen | single-run")->required();
  app.add_option("--config", config_file, "config file with key = value lines");
  app.add_flag("--print-config", print_config, "print the effective config and exit");
  app.footer("any config key can be overridden with --key value");

  CLI11_PARSE(app, argc, argv);

  try {
    mcf::RunConfig config = mcf::default_config(command);
    if (!config_file.empty()) {
      config = mcf::parse_config_file(config_file, config);
      if (config.command != command)
        throw std::invalid_argument("config file is for command '" + config.command + "', not '" + command + "'");
    }
    apply_overrides(config, app.remaining());
    if (print_config) {
      std::cout << mcf::render_config(config);
      return 0;
    }
    return mcf::run_command(config, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
