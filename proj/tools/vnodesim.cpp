// vnodesim: run and compare memory-partitioning scenarios.
//
//   vnodesim run <scenario> -o <dir> [--seed N] [--sample-every T]
//   vnodesim compare <A> <B> -o <dir>
//   vnodesim validate <scenario>
//
// Exit codes: 0 success, 2 invalid input, 1 internal or I/O error.

#include <future>
#include <iostream>

#include <CLI11.hpp>

#include "vnodesim/report.hpp"

namespace {

using namespace vnodesim;

int classify(const SimError& e) {
  switch (e.kind()) {
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError:
    case ErrorKind::IncomparableScenarios:
      return 2;
    default:
      return 1;
  }
}

int cmd_run(const std::string& path, const std::string& out, std::optional<std::uint64_t> seed,
            std::optional<Tick> sample_every) {
  Scenario s = parse_scenario(path);
  if (seed) s.seed = *seed;
  if (sample_every) {
    s.sample_every = *sample_every;
    if (auto issues = validate_scenario(s); !issues.empty()) {
      throw SimError(ErrorKind::ValidationError, issues.front());
    }
  }
  StagedDir dir(out);
  const MetricsReport r = run(s);
  write_run(dir, r, s);
  dir.commit();
  std::cout << s.name << ": kills_lmk=" << r.kill_count(Killer::Lmk) << " kills_oomk=" << r.kill_count(Killer::Oomk)
            << " alloc_stalls=" << r.alloc_stalls << " final_free_mib=" << frames_to_mib(r.final_free()) << "\n";
  return 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, const std::string& out) {
  const Scenario a = parse_scenario(a_path);
  const Scenario b = parse_scenario(b_path);
  check_comparable(a, b);
  StagedDir dir(out);
  auto fa = std::async(std::launch::async, [&] { return run(a); });
  const MetricsReport rb = run(b);
  const MetricsReport ra = fa.get();
  write_run(dir, ra, a, "a_");
  write_run(dir, rb, b, "b_");
  const Comparison c = compare_reports(ra, rb);
  const auto doc = comparison_json(c, ra, rb);
  dir.write("comparison.json", doc.dump(2) + "\n");
  dir.commit();
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_validate(const std::string& path) {
  const Scenario s = parse_scenario(path);
  std::cout << path << ": ok (" << s.name << ", " << s.node_sizes().size() << " node(s), " << s.apps.size()
            << " app(s), " << s.events.size() << " event(s))\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual memory node partitioning simulator"};
  app.require_subcommand(1);

  std::string scenario, scenario_b, out;
  std::optional<std::uint64_t> seed;
  std::optional<Tick> sample_every;

  auto* run_cmd = app.add_subcommand("run", "Run one scenario and write traces");
  run_cmd->add_option("scenario", scenario, "Scenario file")->required();
  run_cmd->add_option("-o,--out", out, "Output directory")->required();
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--sample-every", sample_every, "Override the sampling interval in ticks");

  auto* cmp_cmd = app.add_subcommand("compare", "Run a reference and a candidate scenario and diff them");
  cmp_cmd->add_option("reference", scenario, "Reference (before) scenario")->required();
  cmp_cmd->add_option("candidate", scenario_b, "Candidate (after) scenario")->required();
  cmp_cmd->add_option("-o,--out", out, "Output directory")->required();

  auto* val_cmd = app.add_subcommand("validate", "Parse and validate a scenario");
  val_cmd->add_option("scenario", scenario, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return cmd_run(scenario, out, seed, sample_every);
    if (*cmp_cmd) return cmd_compare(scenario, scenario_b, out);
    if (*val_cmd) return cmd_validate(scenario);
  } catch (const SimError& e) {
    std::cerr << "vnodesim: " << e.what() << "\n";
    return classify(e);
  } catch (const std::exception& e) {
    std::cerr << "vnodesim: internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
