#pragma once

#include <string>
#include <utility>
#include <vector>

namespace shocklab {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  double seconds = 0.0;
  double budget = 0.0;  // wall-clock limit in seconds
  std::vector<std::pair<std::string, double>> metrics;
  std::string note;
};

// Each criterion writes its CSV data under out_dir (empty: no files).
CriterionResult criterion_profiles(const std::string& out_dir);
CriterionResult criterion_spectrum(const std::string& out_dir);
CriterionResult criterion_evans(const std::string& out_dir);
CriterionResult criterion_manifold(const std::string& out_dir);
CriterionResult criterion_dichotomy(const std::string& out_dir);
CriterionResult criterion_decay(const std::string& out_dir);
CriterionResult criterion_templates(const std::string& out_dir);

// Criteria 1-7 (or the listed subset) in order; acceptance.csv summarizes metrics without timings.
std::vector<CriterionResult> run_acceptance(const std::string& out_dir, const std::vector<int>& only = {});

// Byte comparison of every CSV below two directories; lists the differing or missing files.
struct DirectoryComparison {
  int files = 0;
  std::vector<std::string> mismatched;
  bool identical() const { return files > 0 && mismatched.empty(); }
};
DirectoryComparison compare_csv_trees(const std::string& a, const std::string& b);

std::string format_result(const CriterionResult& r);

}  // namespace shocklab
