#pragma once

#include <filesystem>
#include <optional>

#include "oomcraft/analysis.hpp"
#include "oomcraft/dataset.hpp"
#include "oomcraft/features.hpp"
#include "oomcraft/model.hpp"

namespace oomcraft {

/// Doubles print with 17 significant digits so read(write(x)) is bit-exact.
std::string format_real(double value);

/// Strict double parser: the whole token must be a finite decimal literal.
double parse_real(const std::string& token, const std::string& context);

// --- trajectory files -------------------------------------------------
//   #oomcraft-traj v1 kind=<discrete|continuous> dim=<d>
//   one record per line: an integer symbol, or d comma-separated reals

void write_trajectory_discrete(const std::filesystem::path& path, const std::vector<int>& traj);
void write_trajectory_continuous(const std::filesystem::path& path, const Matrix& traj);

// --- dataset manifests ------------------------------------------------
//   #oomcraft-manifest v1
//   meta.<key>=<value> lines, then one relative trajectory path per line

/// Writes all trajectories as <stem>_NNNNNN.txt next to <dir>/<stem>.manifest
/// and returns the manifest path.
std::filesystem::path write_dataset(const TrajectoryDataset& data,
                                    const std::filesystem::path& dir,
                                    const std::string& stem = "traj");

TrajectoryDataset read_dataset(const std::filesystem::path& manifest_path);

// --- model files --------------------------------------------------------
//   #oomcraft-model v1, then sectioned key/value and numeric blocks.

struct SavedModel {
    std::optional<Oom> oom;
    std::optional<BinlessOom> binless;
    // feature map the model was learned with (embedded for provenance)
    std::optional<DiscreteIndicatorMap> indicator_map;
    std::optional<GaussianRandomMap> gaussian_map;
    // bin geometry for coarse-grained models (density convention)
    std::optional<BinSpec> bins;
};

void write_model(const SavedModel& model, const std::filesystem::path& path);
SavedModel read_model(const std::filesystem::path& path);

// --- result CSVs ----------------------------------------------------------

void write_results_csv(const ResultsTable& table, const std::filesystem::path& path);
void write_summary_csv(const ResultsTable& table, const std::filesystem::path& path);
void write_histogram_csv(const std::vector<double>& edges, const Vector& weights,
                         const std::filesystem::path& path);

} // namespace oomcraft
