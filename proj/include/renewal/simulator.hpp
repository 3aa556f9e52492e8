#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "renewal/distributions.hpp"
#include "renewal/rng.hpp"

namespace renewal {

/// One thinned flow: the number of kept renewals and the gaps between
/// consecutive kept renewals.
struct FlowRecord {
  std::int64_t sampled_count = 0;
  std::vector<double> gaps;  // length max(sampled_count - 1, 0), all > 0

  bool operator==(const FlowRecord&) const = default;
};

struct SampledDataset {
  double q = 0.5;
  std::vector<FlowRecord> records;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return records.size(); }
  bool operator==(const SampledDataset&) const = default;

  /// Throws Format on an invalid record (`where` prefixes the message).
  void validate(const std::string& where = "dataset") const;
};

struct OriginalFlow {
  std::int64_t w = 0;
  std::vector<double> gaps;  // length w - 1
};

OriginalFlow simulate_flow(const ModelSpec& model, Engine& rng);

/// Keeps each renewal independently with probability q.
FlowRecord thin_flow(const OriginalFlow& flow, double q, Engine& rng);

/// Same, with the keep pattern given explicitly (keep.size() == w).
FlowRecord thin_flow(const OriginalFlow& flow, const std::vector<bool>& keep);

/// N flows; record k uses stream (seed, k), so output is a function of
/// (model, n, seed) alone.
SampledDataset simulate_dataset(const ModelSpec& model, std::size_t n, std::uint64_t seed);

/// Newline-delimited JSON: header {"q":..,"n":..,"seed":..}, then one
/// {"s":..,"gaps":[..]} per record, floats with 17 significant digits.
void write_dataset(const SampledDataset& ds, const std::string& path);
SampledDataset read_dataset(const std::string& path);

std::string dataset_to_string(const SampledDataset& ds);
SampledDataset dataset_from_string(const std::string& text);

}  // namespace renewal
