// skcat: figure-data generator for spin Kerr-cat qubits.
//
//   skcat <spectrum|catfit|dephasing|relaxation|gatemap|protocol>
//         [--config PATH] [--out DIR] [--seed N] [--jobs N]
//         [--convention paper-literal|angular] [--json]
//
// Datasets go to DIR as CSV (and JSON with --json), the report to
// DIR/<command>_report.txt and stdout; progress goes to stderr.
// Exit codes: 0 success, 2 configuration or domain error, 3 numerical failure.

#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "skcat/reports.hpp"

namespace {

using Command = std::function<skcat::Report(skcat::Config&, const skcat::RunContext&)>;

std::string manifest(const std::string& name, const skcat::RunContext& ctx, const skcat::Report& rep) {
  std::string s = "command: " + name + "\n";
  s += "convention: " + skcat::to_string(ctx.convention) + "\n";
  s += "seed: " + std::to_string(ctx.seed) + "\n";
  for (const auto& d : rep.datasets) s += "dataset " + d.name + ".csv " + d.content_hash() + "\n";
  s += "\n";
  for (const auto& l : rep.lines) s += l + "\n";
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spin Kerr-cat qubit figure data"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", convention = "paper-literal";
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  bool json = false;

  const std::map<std::string, Command> commands = {
      {"spectrum", skcat::cmd_spectrum},     {"catfit", skcat::cmd_catfit},
      {"dephasing", skcat::cmd_dephasing},   {"relaxation", skcat::cmd_relaxation},
      {"gatemap", skcat::cmd_gatemap},       {"protocol", skcat::cmd_protocol}};

  for (const auto& [name, fn] : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "master random seed");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--convention", convention, "unit convention")
        ->check(CLI::IsMember({"paper-literal", "angular"}));
    sub->add_flag("--json", json, "also write JSON mirrors");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    skcat::Config cfg = config_path.empty() ? skcat::Config{} : skcat::Config::load(config_path);
    skcat::RunContext ctx;
    ctx.seed = seed;
    ctx.jobs = jobs;
    ctx.convention = skcat::convention_from_string(convention);
    ctx.progress = &std::cerr;
    const skcat::Report rep = commands.at(name)(cfg, ctx);
    for (const auto& d : rep.datasets) skcat::write_dataset(d, out_dir, json);
    const std::string text = manifest(name, ctx, rep);
    skcat::write_text(std::filesystem::path(out_dir) / (name + "_report.txt"), text);
    std::cout << text;
  } catch (const skcat::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const skcat::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
