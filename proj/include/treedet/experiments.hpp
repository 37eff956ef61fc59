#pragma once

#include <string>
#include <vector>

#include "treedet/config.hpp"

namespace treedet {

// All experiment outputs are numeric tables; the CSV body is a pure function
// of (config minus out/workers, seed).
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

ResultTable run_experiment(const ExperimentConfig& cfg);

// Fixed-format numeric rendering ("%.12g"), locale-independent.
std::string format_number(double v);

// Writes header + rows to path via a temp file and atomic rename, so a
// failing run never leaves a partial CSV behind.
void write_csv_atomic(const std::string& path, const ResultTable& t);

// Sidecar <csv path>.meta.json: resolved config, its hash, seed, version,
// elapsed wall time and row count.
void write_metadata(const std::string& csv_path, const ExperimentConfig& cfg,
                    double elapsed_seconds, std::size_t rows);

inline constexpr const char* kVersion = "treedet 0.1.0";

}  // namespace treedet
