#include <fstream>
#include <iostream>

#include "qbc/cli.hpp"

int main(int argc, char** argv) {
  qbc::cli::RunSpec spec;
  CLI::App app{"Quantum bit-commitment cheating analysis"};
  app.require_subcommand(1);
  qbc::cli::register_options(app, spec);
  for (const auto& [name, fn] : qbc::cli::commands()) {
    app.add_subcommand(name)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  spec.command = app.get_subcommands().front()->get_name();

  try {
    const std::string text = qbc::cli::render(spec, qbc::cli::run_command(spec));
    if (spec.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream file(spec.out, std::ios::binary);
      if (!file) throw std::runtime_error("cannot open " + spec.out);
      file << text;
    }
  } catch (const std::exception& e) {
    std::cerr << "qbc: error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
