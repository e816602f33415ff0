#include <iostream>

#include "CLI11.hpp"
#include "jkcv/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"J-K-fold cross-validation experiments"};
  jkcv::cli::RunOptions options;
  std::string format;
  app.add_option("--config", options.config_path, "experiment config file")->required();
  app.add_option("--workers", options.workers, "worker threads (0 = all available)")->capture_default_str();
  app.add_option("--format", format, "report format: csv or json (overrides the config)");
  app.add_option("--out", options.out_dir, "output directory")->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  if (!format.empty()) options.format = format;
  return jkcv::cli::run(options, std::cout, std::cerr);
}
