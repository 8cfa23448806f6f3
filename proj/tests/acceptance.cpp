// Acceptance runner: criteria 1-7 into run1/, a full rerun into run2/, and
// criterion 8 as a byte comparison of the two CSV trees.
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shocklab/acceptance.hpp"

namespace fs = std::filesystem;
using namespace shocklab;

int main(int argc, char** argv) {
  CLI::App app{"shocklab acceptance suite"};
  std::string out = (fs::temp_directory_path() / "shocklab_acceptance").string();
  std::vector<int> only, allow_fail;
  bool skip_rerun = false;
  app.add_option("--out", out, "scratch directory for both runs");
  app.add_option("--only", only, "criteria to run (1-7)");
  app.add_option("--allow-fail", allow_fail, "criteria whose FAIL does not set the exit status");
  app.add_flag("--skip-rerun", skip_rerun, "do not run criterion 8");
  CLI11_PARSE(app, argc, argv);

  fs::remove_all(out);
  const auto run1 = (fs::path(out) / "run1").string();
  const auto first = run_acceptance(run1, only);
  bool ok = true;
  auto tally = [&](int id, bool pass) {
    if (!pass && std::find(allow_fail.begin(), allow_fail.end(), id) == allow_fail.end()) ok = false;
  };
  for (const auto& r : first) {
    std::printf("%s\n", format_result(r).c_str());
    std::fflush(stdout);
    tally(r.id, r.pass);
  }
  if (!skip_rerun) {
    const auto run2 = (fs::path(out) / "run2").string();
    run_acceptance(run2, only);
    const auto cmp = compare_csv_trees(run1, run2);
    std::printf("%s criterion 8 (determinism) csv_files=%d mismatched=%zu", cmp.identical() ? "PASS" : "FAIL", cmp.files,
                cmp.mismatched.size());
    for (const auto& n : cmp.mismatched) std::printf(" %s", n.c_str());
    std::printf("\n");
    tally(8, cmp.identical());
  }
  if (!allow_fail.empty()) {
    std::printf("exit status ignores criteria:");
    for (int id : allow_fail) std::printf(" %d", id);
    std::printf("\n");
  }
  return ok ? 0 : 1;
}
