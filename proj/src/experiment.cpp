#include "ebdiff/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "ebdiff/errors.hpp"
#include "ebdiff/rng.hpp"

namespace ebdiff {

namespace {

// Replicas per reduction batch. Fixed so the reduction order never depends
// on the number of worker threads.
constexpr long kBatch = 64;

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

std::string hex(std::uint64_t x) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << x;
  return os.str();
}

std::uint64_t mix_sample(std::uint64_t h, const DataSample& s) {
  for (Eigen::Index j = 0; j < s.u.size(); ++j) {
    h = splitmix64(h ^ std::bit_cast<std::uint64_t>(s.u(j)));
  }
  return splitmix64(h ^ std::bit_cast<std::uint64_t>(s.d));
}

struct ReplicaOutput {
  std::vector<ReplicaCurves> curves;
  std::vector<GapAudit> audits;
  std::vector<std::string> traces;
  std::uint64_t checksum = 0;
  std::optional<NonFiniteUpdate> error;
};

template <typename Fn>
void parallel_for(long begin, long end, int threads, Fn&& fn) {
  const long count = end - begin;
  const int workers = static_cast<int>(std::clamp<long>(threads, 1, std::max<long>(count, 1)));
  if (workers <= 1) {
    for (long r = begin; r < end; ++r) fn(r);
    return;
  }
  std::atomic<long> next{begin};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (long r = next++; r < end; r = next++) fn(r);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

Scenario build_scenario(const ExperimentConfig& config) {
  Scenario s{[&] {
               switch (config.topology) {
                 case TopologyKind::kRandomGeometric:
                   return random_geometric_topology(config.nodes, config.topology_radius,
                                                    config.topology_seed);
                 case TopologyKind::kPath:
                   return path_topology(config.nodes);
                 case TopologyKind::kComplete:
                   return complete_topology(config.nodes);
                 case TopologyKind::kFile:
                   break;
               }
               auto t = load_edge_list(config.topology_file);
               if (t.size() != config.nodes) {
                 throw ValidationError("topology_file has " + std::to_string(t.size()) +
                                       " nodes, config says " + std::to_string(config.nodes));
               }
               return t;
             }(),
             {},
             {},
             {}};
  s.weights = metropolis_weights(s.topology);
  s.profiles = sample_profiles(config.nodes, config.dim, config.regressor_power, config.noise_db,
                               config.mu, derive_seed(config.seed, StreamTag::kProfiles));
  if (!config.regressor_cov_diag.empty()) {
    Matrix cov = Matrix::Zero(config.dim, config.dim);
    for (int m = 0; m < config.dim; ++m) cov(m, m) = config.regressor_cov_diag[m];
    for (auto& p : s.profiles) p = NodeProfile(p.mu(), cov, p.noise_var());
  }
  s.truth = sample_ground_truth(config.dim, derive_seed(config.seed, StreamTag::kGroundTruth));
  return s;
}

const AlgorithmResult* ExperimentResult::find(Algorithm algorithm,
                                              std::optional<double> delta) const {
  for (const auto& a : algorithms) {
    if (a.spec.algorithm != algorithm) continue;
    if (!delta) return &a;
    if (a.spec.schedule && a.spec.schedule->is_constant() &&
        a.spec.schedule->breakpoints().front().second == *delta) {
      return &a;
    }
  }
  return nullptr;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  validate_config(config);
  const auto started = std::chrono::steady_clock::now();

  ExperimentResult result;
  result.scenario = build_scenario(config);
  const Scenario& sc = result.scenario;
  const int n = config.nodes;
  const int m = config.dim;
  const long horizon = config.horizon;
  const std::size_t n_alg = config.algorithms.size();

  std::vector<std::vector<TriggerPolicy>> policies(n_alg);
  std::vector<DiffusionNetwork> prototypes;
  for (std::size_t a = 0; a < n_alg; ++a) {
    const auto& spec = config.algorithms[a];
    if (spec.algorithm != Algorithm::kNonCoop) {
      policies[a].assign(n, config.policy_for(spec));
    }
    prototypes.emplace_back(spec.algorithm, sc.topology, sc.weights, sc.profiles,
                            spec.algorithm == Algorithm::kEbAtc ? policies[a]
                                                                : std::vector<TriggerPolicy>{});
  }

  RunManifest& manifest = result.manifest;
  manifest.config = config.resolved();
  manifest.config_hash = config.hash();
  for (long r = 0; r < config.replicas; ++r) manifest.replica_seeds.push_back(replica_seed(config.seed, r));

  auto run_replica = [&](long r) {
    ReplicaOutput out;
    const std::uint64_t rs = manifest.replica_seeds[r];
    std::vector<DataStream> streams;
    streams.reserve(n);
    for (int k = 0; k < n; ++k) streams.emplace_back(node_stream_seed(rs, k));
    std::vector<DiffusionNetwork> nets = prototypes;
    std::vector<ReplicaRecorder> recorders;
    for (std::size_t a = 0; a < n_alg; ++a) {
      recorders.emplace_back(n, m, horizon, options.track_mean_error);
    }
    out.audits.resize(n_alg);
    std::vector<std::ostringstream> traces(options.collect_trace ? n_alg : 0);
    for (auto& t : traces) t << std::setprecision(17);

    std::vector<DataSample> samples(n);
    std::uint64_t checksum = splitmix64(rs);
    try {
      for (long i = 0; i < horizon; ++i) {
        for (int k = 0; k < n; ++k) {
          streams[k].next_into(sc.profiles[k], sc.truth, samples[k]);
          checksum = mix_sample(checksum, samples[k]);
        }
        for (std::size_t a = 0; a < n_alg; ++a) {
          const StepRecord& rec = nets[a].step(samples, i);
          recorders[a].record(nets[a], sc.truth);
          if (!policies[a].empty()) out.audits[a].observe(rec, policies[a]);
          if (options.collect_trace) {
            for (int k = 0; k < n; ++k) {
              const double share = (sc.truth.w_star - nets[a].state(k).w).squaredNorm() / n;
              traces[a] << r << ',' << i << ',' << (k + 1) << ',' << int(rec.gamma[k]) << ','
                        << rec.posterior_gap_sq[k] << ',' << share << '\n';
            }
          }
        }
      }
    } catch (const NonFiniteUpdate& e) {
      out.error = e.with_replica(r);
      return out;
    }
    out.checksum = checksum;
    for (auto& rec : recorders) out.curves.push_back(rec.take());
    for (auto& t : traces) out.traces.push_back(t.str());
    return out;
  };

  std::vector<CurveAccumulator> acc(n_alg);
  std::vector<GapAudit> audits(n_alg);
  std::vector<std::string> traces(n_alg);

  auto finalize = [&] {
    for (std::size_t a = 0; a < n_alg; ++a) {
      AlgorithmResult ar;
      ar.spec = config.algorithms[a];
      ar.curves = acc[a].finish();
      if (ar.curves.horizon() > 0) ar.summary = steady_state(ar.curves, config.window_fraction);
      ar.audit = audits[a];
      ar.trace_csv = std::move(traces[a]);
      result.algorithms.push_back(std::move(ar));
    }
    manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };

  for (long b0 = 0; b0 < config.replicas; b0 += kBatch) {
    const long b1 = std::min(config.replicas, b0 + kBatch);
    std::vector<ReplicaOutput> outs(b1 - b0);
    parallel_for(b0, b1, options.threads, [&](long r) { outs[r - b0] = run_replica(r); });
    for (long r = b0; r < b1; ++r) {
      auto& out = outs[r - b0];
      if (out.error) {
        manifest.abort_reason = out.error->what();
        finalize();
        throw ExperimentAborted(out.error->what(), std::move(result));
      }
      for (std::size_t a = 0; a < n_alg; ++a) {
        acc[a].add(out.curves[a]);
        audits[a].merge(out.audits[a]);
        if (options.collect_trace) traces[a] += out.traces[a];
      }
      manifest.stream_checksums.push_back(out.checksum);
      ++manifest.completed_replicas;
    }
  }
  finalize();
  return result;
}

void write_manifest(const std::string& path, const RunManifest& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << "version=" << m.version << '\n';
  out << "config_hash=" << hex(m.config_hash) << '\n';
  for (const auto& [k, v] : m.config) out << "config." << k << '=' << v << '\n';
  out << "seed_scheme=replica_seed(r)=derive_seed(seed,{replica_tag,r}); "
         "node_stream(r,k)=derive_seed(replica_seed(r),{node_tag,k}); mt19937_64\n";
  out << "replicas_completed=" << m.completed_replicas << '\n';
  if (!m.abort_reason.empty()) out << "abort_reason=" << m.abort_reason << '\n';
  out << "wall_clock_seconds=" << fmt(m.wall_clock_seconds) << '\n';
  for (std::size_t r = 0; r < m.replica_seeds.size(); ++r) {
    out << "replica." << r << ".seed=" << m.replica_seeds[r] << '\n';
    if (r < m.stream_checksums.size()) {
      out << "replica." << r << ".stream_checksum=" << hex(m.stream_checksums[r]) << '\n';
    }
  }
  for (const auto& f : m.files) out << "file=" << f << '\n';
}

void write_outputs(const std::string& dir, ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto& files = result.manifest.files;
  files.clear();
  auto open = [&](const std::string& name) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw Error("cannot write '" + (fs::path(dir) / name).string() + "'");
    files.push_back(name);
    return out;
  };

  for (const auto& a : result.algorithms) {
    {
      auto out = open("curves_" + a.spec.slug() + ".csv");
      write_curves_csv(out, a.curves);
    }
    {
      auto out = open("rates_" + a.spec.slug() + ".csv");
      write_rates_csv(out, a.summary.node_rates);
    }
    if (!a.trace_csv.empty()) {
      auto out = open("trace_" + a.spec.slug() + ".csv");
      write_trace_header(out);
      out << a.trace_csv;
    }
  }
  {
    auto out = open("summary.csv");
    out << "algorithm,replicas,msd_ss_dB,entr_ss,settle_instant,window_start,window_end,"
           "gap_checks,gap_bound_violations,gap_exactness_violations,gap_max_ratio\n";
    for (const auto& a : result.algorithms) {
      out << a.spec.label() << ',' << a.curves.replicas << ',' << fmt(a.summary.msd_ss_db) << ','
          << fmt(a.summary.entr_ss) << ',' << a.summary.settle_instant << ','
          << a.summary.window_start << ',' << a.summary.window_end << ',' << a.audit.checks << ','
          << a.audit.bound_violations << ',' << a.audit.exactness_violations << ','
          << fmt(a.audit.max_ratio) << '\n';
    }
  }
  {
    auto out = open("profiles.txt");
    write_profiles(out, result.scenario.profiles);
  }
  {
    auto out = open("topology.txt");
    write_edge_list(out, result.scenario.topology);
  }
  files.push_back("manifest.txt");
  write_manifest((fs::path(dir) / "manifest.txt").string(), result.manifest);
}

ComparisonResult run_bound_comparison(const ExperimentConfig& config, const RunOptions& options) {
  validate_config(config);
  const int mn = config.nodes * config.dim;
  if (mn > config.f_cap) {
    throw DimensionCapExceeded("bound comparison needs MN <= " + std::to_string(config.f_cap) +
                               ", have " + std::to_string(mn));
  }
  ExperimentConfig sim = config;
  sim.algorithms.clear();
  for (const auto& a : config.algorithms) {
    if (a.algorithm != Algorithm::kNonCoop) sim.algorithms.push_back(a);
  }
  if (sim.algorithms.empty()) throw ValidationError("compare needs an ATC or EB-ATC entry");

  const Scenario scenario = build_scenario(sim);
  const double beta = mean_beta(scenario.profiles);
  if (!(beta < 1.0)) {
    throw UnstableConfiguration("||I - M R_u||_b,inf = " + fmt(beta) +
                                " >= 1; mean error bound does not exist");
  }
  const auto ws = build_workspace(scenario.weights, scenario.profiles, config.f_cap);

  ComparisonResult out;
  out.stability = stability_report(ws, scenario.weights, scenario.profiles);
  RunOptions opts = options;
  opts.track_mean_error = true;
  out.simulation = run_experiment(sim, opts);

  for (const auto& a : out.simulation.algorithms) {
    BoundComparison row;
    row.spec = a.spec;
    const std::vector<TriggerPolicy> policies(config.nodes, sim.policy_for(a.spec));
    row.mean_error_bound = mean_error_bound(scenario.weights, scenario.profiles, policies);

    const long s0 = a.summary.window_start, s1 = a.summary.window_end;
    const Vector avg_err = a.curves.mean_error.middleCols(s0, s1 - s0).rowwise().mean();
    row.empirical_mean_error = block_max_vector_norm(avg_err, config.dim);
    double msd = 0.0;
    for (long i = s0; i < s1; ++i) msd += a.curves.msd_linear[i];
    row.empirical_msd = msd / static_cast<double>(s1 - s0);

    row.trigger_rates = a.summary.node_rates;
    const auto f = msd_bound_vectors(ws, delta_total(policies));
    try {
      row.msd_bound = msd_upper_bound(ws, f, empirical_trigger_matrix(row.trigger_rates, config.dim));
      row.msd_note = "O(mu_max^2) dropped; trigger term from empirical steady-state rates";
    } catch (const UnstableF& e) {
      row.msd_note = e.what();
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

void write_comparison(const std::string& dir, const ComparisonResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "stability.txt");
    write_key_values(out, to_key_values(result.stability));
  }
  std::ofstream out(fs::path(dir) / "comparison.csv");
  out << "algorithm,empirical_mean_error,mean_error_bound,mean_slack,empirical_msd,"
         "msd_upper_bound,msd_slack,rho_F\n";
  for (const auto& r : result.rows) {
    out << r.spec.label() << ',' << fmt(r.empirical_mean_error) << ',' << fmt(r.mean_error_bound)
        << ',' << fmt(r.mean_slack()) << ',' << fmt(r.empirical_msd) << ','
        << (r.msd_bound ? fmt(r.msd_bound->value) : "inf") << ','
        << (r.msd_bound ? fmt(r.msd_slack()) : "nan") << ','
        << (r.msd_bound ? fmt(r.msd_bound->rho_F) : "nan") << '\n';
  }
}

}  // namespace ebdiff
