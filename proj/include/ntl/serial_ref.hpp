#pragma once

#include <cstdint>
#include <vector>

#include "ntl/core.hpp"
#include "ntl/density.hpp"
#include "ntl/features.hpp"
#include "ntl/forest.hpp"
#include "ntl/stats_tests.hpp"
#include "ntl/synthgen.hpp"

// Serial reference implementations of the OpenMP-parallel kernels: the same
// per-item computations driven by plain loops. Tests compare them bit for bit
// against the parallel versions at several thread counts, and bench_kernels
// times the two side by side.
namespace ntl::serial {

std::vector<double> extract_matrix(const std::vector<MonthlyTimeSeries>& series,
                                   const FeatureConfig& config);

SelectionResult select_features(const std::vector<double>& matrix, std::size_t n_features,
                                const std::vector<int>& labels, double alpha);

KdeSelection kde_select(const std::vector<double>& sample, const KdeSearchSpec& spec,
                        std::uint64_t seed);

ForestModel fit_forest(const std::vector<double>& x_row_major, std::size_t n, std::size_t d,
                       const std::vector<int>& y, const std::vector<double>& w,
                       const ForestParams& params, std::uint64_t seed);

SearchResult random_search(const std::vector<double>& x_row_major, std::size_t n, std::size_t d,
                           const std::vector<int>& y, const std::vector<double>& w, int n_models,
                           int folds, std::uint64_t seed,
                           const std::vector<int>& fold_ids = {});

SynthPopulation generate_population(const SynthConfig& cfg);

}  // namespace ntl::serial
