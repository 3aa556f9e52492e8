#include "renewal/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "renewal/error.hpp"

namespace renewal {

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

[[noreturn]] void format_error(std::size_t line, const std::string& msg) {
  throw Error(Errc::Format, "line " + std::to_string(line) + ": " + msg);
}

}  // namespace

void SampledDataset::validate(const std::string& where) const {
  if (!(q > 0.0 && q < 1.0)) throw Error(Errc::Format, where + ": q must lie in (0,1)");
  if (records.empty()) throw Error(Errc::Format, where + ": no records");
  for (std::size_t k = 0; k < records.size(); ++k) {
    const FlowRecord& r = records[k];
    const std::int64_t expected = std::max<std::int64_t>(r.sampled_count - 1, 0);
    if (r.sampled_count < 0 || static_cast<std::int64_t>(r.gaps.size()) != expected) {
      throw Error(Errc::Format, where + ": record " + std::to_string(k) +
                                    " has gaps inconsistent with its count");
    }
    for (double g : r.gaps) {
      if (!(g > 0.0) || !std::isfinite(g)) {
        throw Error(Errc::Format, where + ": record " + std::to_string(k) +
                                      " has a non-positive gap");
      }
    }
  }
}

OriginalFlow simulate_flow(const ModelSpec& model, Engine& rng) {
  OriginalFlow f;
  f.w = model.size.sample(rng);
  f.gaps.resize(static_cast<std::size_t>(f.w - 1));
  for (double& g : f.gaps) g = model.gap.sample(rng);
  return f;
}

FlowRecord thin_flow(const OriginalFlow& flow, const std::vector<bool>& keep) {
  if (static_cast<std::int64_t>(keep.size()) != flow.w ||
      static_cast<std::int64_t>(flow.gaps.size()) != std::max<std::int64_t>(flow.w - 1, 0)) {
    throw Error(Errc::InvalidArgument, "keep pattern or gaps do not match w");
  }
  FlowRecord r;
  bool seen = false;
  double pending = 0.0;
  for (std::int64_t j = 0; j < flow.w; ++j) {
    if (keep[static_cast<std::size_t>(j)]) {
      if (seen) r.gaps.push_back(pending);
      seen = true;
      pending = 0.0;
      ++r.sampled_count;
    }
    if (j + 1 < flow.w) pending += flow.gaps[static_cast<std::size_t>(j)];
  }
  return r;
}

FlowRecord thin_flow(const OriginalFlow& flow, double q, Engine& rng) {
  std::vector<bool> keep(static_cast<std::size_t>(flow.w));
  for (std::size_t j = 0; j < keep.size(); ++j) keep[j] = uniform01(rng) < q;
  return thin_flow(flow, keep);
}

SampledDataset simulate_dataset(const ModelSpec& model, std::size_t n, std::uint64_t seed) {
  model.validate();
  if (n == 0) throw Error(Errc::InvalidArgument, "dataset needs N >= 1");
  SampledDataset ds;
  ds.q = model.q;
  ds.seed = seed;
  ds.records.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    Engine rng = make_stream(seed, k);
    ds.records[k] = thin_flow(simulate_flow(model, rng), model.q, rng);
  }
  return ds;
}

std::string dataset_to_string(const SampledDataset& ds) {
  std::string out = "{\"q\": " + format_double(ds.q) +
                    ", \"n\": " + std::to_string(ds.records.size()) +
                    ", \"seed\": " + std::to_string(ds.seed) + "}\n";
  for (const FlowRecord& r : ds.records) {
    out += "{\"s\": " + std::to_string(r.sampled_count) + ", \"gaps\": [";
    for (std::size_t i = 0; i < r.gaps.size(); ++i) {
      if (i) out += ", ";
      out += format_double(r.gaps[i]);
    }
    out += "]}\n";
  }
  return out;
}

SampledDataset dataset_from_string(const std::string& text) {
  using nlohmann::json;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  std::int64_t declared = 0;
  SampledDataset ds;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      format_error(lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) format_error(lineno, "expected an object");
    try {
      if (!have_header) {
        ds.q = j.at("q").get<double>();
        declared = j.at("n").get<std::int64_t>();
        ds.seed = j.at("seed").get<std::uint64_t>();
        if (!(ds.q > 0.0 && ds.q < 1.0)) format_error(lineno, "q must lie in (0,1)");
        if (declared < 1) format_error(lineno, "n must be >= 1");
        have_header = true;
        continue;
      }
      FlowRecord r;
      r.sampled_count = j.at("s").get<std::int64_t>();
      r.gaps = j.at("gaps").get<std::vector<double>>();
      if (r.sampled_count < 0) format_error(lineno, "s must be >= 0");
      if (static_cast<std::int64_t>(r.gaps.size()) !=
          std::max<std::int64_t>(r.sampled_count - 1, 0)) {
        format_error(lineno, "gaps length " + std::to_string(r.gaps.size()) +
                                 " does not equal s-1 for s=" +
                                 std::to_string(r.sampled_count));
      }
      for (double g : r.gaps) {
        if (!(g > 0.0)) format_error(lineno, "gaps must be positive");
      }
      ds.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      format_error(lineno, std::string("bad field: ") + e.what());
    }
  }
  if (!have_header) throw Error(Errc::Format, "line 1: missing header");
  if (static_cast<std::int64_t>(ds.records.size()) != declared) {
    throw Error(Errc::Format, "header declares n=" + std::to_string(declared) + " but " +
                                  std::to_string(ds.records.size()) + " records follow");
  }
  return ds;
}

void write_dataset(const SampledDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot open " + path + " for writing");
  out << dataset_to_string(ds);
  if (!out) throw Error(Errc::Io, "write failed for " + path);
}

SampledDataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return dataset_from_string(buf.str());
}

}  // namespace renewal
