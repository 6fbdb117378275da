// Runs the acceptance suite twice with the same seed, prints one PASS/FAIL
// line per criterion and compares the two result files byte for byte.
//
// Exit status is 0 when every criterion passes except those named with
// --known-failure; those still print FAIL.

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <set>

#include <CLI11.hpp>

#include "mom/acceptance.hpp"

namespace fs = std::filesystem;
using namespace mom::acceptance;

int main(int argc, char** argv) {
  CLI::App app{"MOM acceptance suite"};
  std::uint64_t seed = 1;
  std::string out_dir = "acceptance_results";
  std::vector<int> known;
  app.add_option("--seed", seed, "Base seed");
  app.add_option("--out-dir", out_dir, "Directory for the two result files");
  app.add_option("--known-failure", known, "Criterion expected to fail (repeatable)");
  CLI11_PARSE(app, argc, argv);

  fs::create_directories(out_dir);
  const std::string first = (fs::path(out_dir) / "selftest_run1.csv").string();
  const std::string second = (fs::path(out_dir) / "selftest_run2.csv").string();

  auto progress = [](const char* run) {
    return [run](const Outcome& o) {
      std::cerr << "[" << run << " " << std::fixed << std::setprecision(1) << o.seconds << "s] "
                << status_line(o) << std::endl;
    };
  };
  auto outcomes = run_suite(seed, progress("run 1"));
  write_results(outcomes, first);
  write_results(run_suite(seed, progress("run 2")), second);
  outcomes.push_back(determinism(first, second));

  const std::set<int> expected(known.begin(), known.end());
  int unexpected = 0, passed = 0;
  for (const auto& o : outcomes) {
    std::cout << status_line(o) << (o.pass || !expected.count(o.id) ? "" : " [known failure]")
              << '\n';
    passed += o.pass ? 1 : 0;
    if (!o.pass && !expected.count(o.id)) ++unexpected;
  }
  std::cout << passed << "/" << outcomes.size() << " criteria passed";
  if (unexpected) std::cout << ", " << unexpected << " unexpected failure(s)";
  std::cout << std::endl;
  return unexpected ? 1 : 0;
}
