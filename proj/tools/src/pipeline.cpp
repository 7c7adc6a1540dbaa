#include "cdpclust/pipeline.hpp"

#include <cctype>
#include <charconv>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "cdp/error.hpp"
#include "cdp/estimation.hpp"

#ifndef CDPCLUST_VERSION
#define CDPCLUST_VERSION "unknown"
#endif

namespace cdpclust {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kMaxExactItems = 12;

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw cdp::InvalidInput("cannot write " + path.string());
  return out;
}

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw cdp::InvalidInput("cannot create output directory " + dir.string());
  const fs::path probe = dir / ".cdpclust-write-test";
  {
    std::ofstream out(probe);
    if (!out || !(out << 'x') || !out.flush()) {
      throw cdp::InvalidInput("output directory " + dir.string() + " is not writable");
    }
  }
  fs::remove(probe, ec);
}

std::string join_ints(const std::vector<int>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <class T>
T parse_number(const std::string& s, const fs::path& path, int line) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw cdp::LoadError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

cdp::SearchStrategy pick_strategy(const std::string& name, int n) {
  if (name == "exact") return cdp::SearchStrategy::exact;
  if (name == "greedy") return cdp::SearchStrategy::greedy;
  return n <= kMaxExactItems ? cdp::SearchStrategy::exact : cdp::SearchStrategy::greedy;
}

// colour of each output cluster: the colour its items visited most often,
// ties to the lower colour
std::vector<int> majority_colours(const cdp::Partition& p, const std::vector<TraceRow>& rows, int num_colours) {
  std::vector<std::vector<std::uint64_t>> hits(static_cast<std::size_t>(p.degree()),
                                               std::vector<std::uint64_t>(static_cast<std::size_t>(num_colours), 0));
  for (const auto& r : rows) {
    for (int i = 0; i < p.size(); ++i) {
      const int k = r.colours[static_cast<std::size_t>(r.labels[static_cast<std::size_t>(i)])];
      ++hits[static_cast<std::size_t>(p.label_of(i))][static_cast<std::size_t>(k)];
    }
  }
  std::vector<int> out;
  for (const auto& h : hits) {
    int best = 0;
    for (int k = 1; k < num_colours; ++k) {
      if (h[static_cast<std::size_t>(k)] > h[static_cast<std::size_t>(best)]) best = k;
    }
    out.push_back(best);
  }
  return out;
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

// writes everything that derives from the trace alone
std::vector<std::string> write_estimates(const RunConfig& cfg, const DatasetTable& table,
                                         const std::vector<TraceRow>& rows, int num_colours, const fs::path& out,
                                         int& degree) {
  const int n = table.size();
  std::vector<std::string> files;
  cdp::SimilarityAccumulator acc(n);
  for (const auto& r : rows) acc.add(r.partition());
  const cdp::SimilarityMatrix sim = acc.matrix();

  {
    auto os = open_out(out / "similarity.csv");
    os << "id";
    for (const auto& id : table.ids) os << ',' << id;
    os << '\n';
    for (int i = 0; i < n; ++i) {
      os << table.ids[static_cast<std::size_t>(i)];
      for (int j = 0; j < n; ++j) os << ',' << format_double(sim.rho(i, j));
      os << '\n';
    }
    files.push_back("similarity.csv");
  }

  const cdp::Partition best = cdp::optimal_partition(sim, cfg.loss, pick_strategy(cfg.strategy, n));
  degree = best.degree();
  const std::vector<int> colours = majority_colours(best, rows, num_colours);
  {
    auto os = open_out(out / "partition.csv");
    os << "id,cluster,colour\n";
    for (int i = 0; i < n; ++i) {
      const int c = best.label_of(i);
      os << table.ids[static_cast<std::size_t>(i)] << ',' << c + 1 << ',' << colours[static_cast<std::size_t>(c)]
         << '\n';
    }
    files.push_back("partition.csv");
  }

  {
    const auto summaries = cdp::cluster_summaries(best, table.data);
    auto os = open_out(out / "cluster_summaries.csv");
    os << "cluster,colour,size,sample,mean,lower,upper\n";
    for (std::size_t c = 0; c < summaries.size(); ++c) {
      const auto& s = summaries[c];
      for (int k = 0; k < table.samples(); ++k) {
        os << c + 1 << ',' << colours[c] << ',' << s.items.size() << ',' << table.sample_names[static_cast<std::size_t>(k)]
           << ',' << format_double(s.mean(k)) << ',' << format_double(s.lower(k)) << ','
           << format_double(s.upper(k)) << '\n';
      }
    }
    files.push_back("cluster_summaries.csv");
  }

  for (const auto& [name, values] : table.annotations) {
    const cdp::Crosstab t = cdp::crosstab(best, values);
    const std::string file = "crosstab_" + safe_name(name) + ".csv";
    auto os = open_out(out / file);
    os << "cluster";
    for (const auto& cat : t.categories) os << ',' << cat;
    os << '\n';
    for (std::size_t c = 0; c < t.counts.size(); ++c) {
      os << c + 1;
      for (int v : t.counts[c]) os << ',' << v;
      os << '\n';
    }
    files.push_back(file);
  }
  return files;
}

json manifest_json(const RunConfig& cfg, const std::vector<TraceRow>& rows, const std::vector<std::string>& files,
                   const std::vector<std::string>& warnings) {
  // the output location is left out so that reruns elsewhere are byte-identical
  json echo = to_json(cfg);
  echo.erase("output");
  json lp = json::array();
  for (int c = 0; c < cfg.chains; ++c) lp.push_back(json::array());
  for (const auto& r : rows) lp[static_cast<std::size_t>(r.chain)].push_back(r.log_posterior);
  return json{{"cdpclust_version", CDPCLUST_VERSION},
              {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                    std::to_string(EIGEN_MINOR_VERSION)},
              {"config", echo},
              {"seed", cfg.seed},
              {"chains", cfg.chains},
              {"outputs", files},
              {"warnings", warnings},
              {"log_posterior", lp}};
}

void write_manifest(const fs::path& path, const json& m) {
  auto os = open_out(path);
  os << m.dump(2) << '\n';
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw cdp::NumericalFailure("cannot format number");
  return std::string(buf, ptr);
}

std::vector<TraceRow> to_rows(int chain, const std::vector<cdp::TraceRecord>& trace) {
  std::vector<TraceRow> rows;
  rows.reserve(trace.size());
  for (const auto& t : trace) {
    rows.push_back({chain, t.sweep, t.log_posterior, t.partition.cluster_colours(), t.partition.partition().labels()});
  }
  return rows;
}

void write_trace_csv(const fs::path& path, const std::vector<std::string>& ids, const std::vector<TraceRow>& rows) {
  auto os = open_out(path);
  os << "chain,sweep,degree,log_posterior,colours";
  for (const auto& id : ids) os << ',' << id;
  os << '\n';
  for (const auto& r : rows) {
    os << r.chain << ',' << r.sweep << ',' << r.colours.size() << ',' << format_double(r.log_posterior) << ','
       << join_ints(r.colours, ';');
    for (int l : r.labels) os << ',' << l + 1;
    os << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(const fs::path& path, std::vector<std::string>& ids) {
  std::ifstream in(path);
  if (!in) throw cdp::LoadError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw cdp::LoadError(path.string() + ": empty trace file");
  auto header = split(line, ',');
  if (header.size() < 6 || header[0] != "chain" || header[4] != "colours") {
    throw cdp::LoadError(path.string() + ": not a trace file");
  }
  ids.assign(header.begin() + 5, header.end());
  std::vector<TraceRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) {
      throw cdp::LoadError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                           std::to_string(header.size()) + " fields");
    }
    TraceRow r;
    r.chain = parse_number<int>(f[0], path, lineno);
    r.sweep = parse_number<int>(f[1], path, lineno);
    r.log_posterior = parse_number<double>(f[3], path, lineno);
    for (const auto& c : split(f[4], ';')) r.colours.push_back(parse_number<int>(c, path, lineno));
    for (std::size_t i = 5; i < f.size(); ++i) r.labels.push_back(parse_number<int>(f[i], path, lineno) - 1);
    const cdp::Partition p = cdp::Partition::from_allocation(r.labels);
    if (p.labels() != r.labels || p.degree() != static_cast<int>(r.colours.size()) ||
        parse_number<int>(f[2], path, lineno) != p.degree()) {
      throw cdp::LoadError(path.string() + ":" + std::to_string(lineno) + ": labels are not canonical");
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw cdp::LoadError(path.string() + ": trace has no rows");
  return rows;
}

RunConfig load_config_or_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw cdp::LoadError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw cdp::LoadError(path.string() + ": " + e.what());
  }
  if (doc.is_object() && doc.contains("cdpclust_version") && doc.contains("config")) {
    return parse_run_config(doc.at("config"), fs::absolute(path).parent_path());
  }
  return parse_run_config(doc, fs::absolute(path).parent_path());
}

PipelineResult run_pipeline(const RunConfig& cfg_in) {
  RunConfig cfg = cfg_in;
  cfg.plan.seed = cfg.seed;
  cfg.validate();
  const cdp::PartitionPriorModel prior = cfg.prior_model();
  ensure_writable(cfg.output);

  const DatasetTable table = load_dataset(cfg.data, cfg.annotation_columns);
  const cdp::DesignBlock design = build_design(cfg, table.samples());
  std::vector<cdp::ConjugateMarginal> marginals;
  for (const auto& spec : cfg.likelihood_priors(design.z_cols(), design.x_cols())) {
    marginals.emplace_back(spec, design);
  }
  const auto model = std::make_shared<const cdp::ChainModel>(prior, table.data, std::move(marginals));

  std::vector<std::vector<cdp::TraceRecord>> traces(static_cast<std::size_t>(cfg.chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.chains));
  {
    std::vector<std::thread> workers;
    for (int c = 0; c < cfg.chains; ++c) {
      workers.emplace_back([&, c] {
        try {
          traces[static_cast<std::size_t>(c)] = cdp::run_chain(model, cfg.plan, static_cast<std::uint64_t>(c));
        } catch (...) {
          errors[static_cast<std::size_t>(c)] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<TraceRow> rows;
  for (int c = 0; c < cfg.chains; ++c) {
    auto part = to_rows(c, traces[static_cast<std::size_t>(c)]);
    rows.insert(rows.end(), part.begin(), part.end());
  }

  PipelineResult result;
  result.output = cfg.output;
  result.warnings = table.warnings;
  write_trace_csv(cfg.output / "trace.csv", table.ids, rows);
  result.files.push_back("trace.csv");
  const auto est = write_estimates(cfg, table, rows, prior.num_colours(), cfg.output, result.degree);
  result.files.insert(result.files.end(), est.begin(), est.end());
  result.files.push_back("manifest.json");
  write_manifest(cfg.output / "manifest.json", manifest_json(cfg, rows, result.files, result.warnings));
  return result;
}

PipelineResult summarize_run(const fs::path& run_dir, const fs::path& output) {
  const RunConfig cfg = load_config_or_manifest(run_dir / "manifest.json");
  cfg.validate();
  const fs::path out = output.empty() ? run_dir : output;
  ensure_writable(out);
  const DatasetTable table = load_dataset(cfg.data, cfg.annotation_columns);
  std::vector<std::string> ids;
  const auto rows = read_trace_csv(run_dir / "trace.csv", ids);
  if (ids != table.ids) throw cdp::InvalidInput("trace item ids do not match the data file");
  const int num_colours = cfg.prior_model().num_colours();
  for (const auto& r : rows) {
    for (int k : r.colours) {
      if (k < 0 || k >= num_colours) throw cdp::LoadError("trace colour out of range for the configured model");
    }
  }
  PipelineResult result;
  result.output = out;
  result.warnings = table.warnings;
  result.files = write_estimates(cfg, table, rows, num_colours, out, result.degree);
  return result;
}

}  // namespace cdpclust
