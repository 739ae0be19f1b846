#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "modflow/cliff_map.hpp"
#include "modflow/evaluation.hpp"
#include "modflow/ingest.hpp"
#include "modflow/predictor.hpp"
#include "modflow/stef_map.hpp"
#include "modflow/synthetic.hpp"
#include "modflow/text_io.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace modflow;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitParse = 3;
constexpr int kExitRuntime = 4;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int default_workers() {
  if (const char* env = std::getenv("MODFLOW_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  return 1;
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string hash_hex(const std::string& data) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(data)));
  return buf;
}

std::string fmt3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

void write_manifest(const fs::path& out_path, const std::string& command,
                    const json& config,
                    const std::vector<fs::path>& inputs) {
  json m;
  m["command"] = command;
  m["config"] = config;
  json hashes = json::object();
  for (const auto& in : inputs) {
    hashes[in.string()] = hash_hex(slurp(in));
  }
  m["input_hashes"] = hashes;
  const fs::path manifest = out_path.string() + ".manifest.json";
  std::ofstream out(manifest);
  if (!out) throw std::runtime_error("cannot write " + manifest.string());
  out << m.dump(2) << "\n";
}

// Dataset profiles bundle the published per-dataset defaults; explicit
// flags override individual fields.
struct Profile {
  double obs_horizon_s = 3.0;
  double max_horizon_s = 60.0;
  double dt = 1.0;
  double resolution = 1.0;
  double r_s = 1.0;
  double beta = 1.0;
  double unit_scale = 1.0;
};

Profile profile_of(const std::string& name) {
  Profile p;
  if (name == "atc") {
    p.max_horizon_s = 60.0;
    p.unit_scale = 0.001;  // millimeters in the source logs
  } else if (name == "edinburgh") {
    p.max_horizon_s = 20.0;
  } else if (!name.empty()) {
    throw ConfigError("unknown profile: " + name);
  }
  return p;
}

std::vector<Trajectory> load_generic(const fs::path& file) {
  DatasetConfig cfg;
  auto trajs = parse(file, cfg).trajectories;
  for (auto& t : trajs) recompute_velocities(t);
  return trajs;
}

std::vector<double> parse_horizons(const std::string& spec, double fallback) {
  std::vector<double> out;
  if (spec.empty()) {
    out.push_back(fallback);
    return out;
  }
  for (auto f : split_fields(spec)) {
    double v;
    if (!parse_double(f, v) || v <= 0.0) {
      throw ConfigError("bad horizon: " + std::string(f));
    }
    out.push_back(v);
  }
  return out;
}

// --- synth ---

struct SynthArgs {
  std::string scenario = "corridor";
  std::string out;
  std::uint64_t seed = 1;
  SyntheticParams params;
};

int cmd_synth(const SynthArgs& a) {
  const Scenario sc = scenario_from_string(a.scenario);
  const auto trajs = generate_synthetic(sc, a.params, a.seed);
  write_generic_file(trajs, a.out);
  json cfg;
  cfg["scenario"] = a.scenario;
  cfg["seed"] = a.seed;
  cfg["n_trajectories"] = a.params.n_trajectories;
  cfg["dt"] = a.params.dt;
  cfg["speed"] = a.params.speed;
  cfg["noise"] = a.params.noise;
  cfg["lateral_spread"] = a.params.lateral_spread;
  cfg["corridor_length"] = a.params.corridor_length;
  cfg["leg_length"] = a.params.leg_length;
  cfg["bend_radius"] = a.params.bend_radius;
  cfg["region_size"] = a.params.region_size;
  cfg["bimodal_fraction"] = a.params.bimodal_fraction;
  cfg["bimodal_heading_a"] = a.params.bimodal_heading_a;
  cfg["bimodal_heading_b"] = a.params.bimodal_heading_b;
  cfg["flip_period"] = a.params.flip_period;
  cfg["n_days"] = a.params.n_days;
  cfg["speed_a"] = a.params.speed_a;
  cfg["speed_b"] = a.params.speed_b;
  cfg["curved"] = a.params.curved;
  cfg["base_time"] = a.params.base_time;
  cfg["time_spread"] = a.params.time_spread;
  write_manifest(a.out, "synth", cfg, {});
  std::cout << "wrote " << trajs.size() << " trajectories to " << a.out
            << "\n";
  return 0;
}

// --- convert ---

struct ConvertArgs {
  std::string format = "generic";
  std::string in, out, regions;
  double unit_scale = 0.0;  // 0 = from profile
  double rate = 1.0;
  int min_points = 30;
  std::string profile;
};

int cmd_convert(const ConvertArgs& a) {
  DatasetConfig cfg;
  cfg.format = dataset_format_from_string(a.format);
  const Profile prof = profile_of(a.profile);
  cfg.unit_scale = a.unit_scale > 0.0 ? a.unit_scale : prof.unit_scale;
  cfg.target_rate = a.rate;
  cfg.min_points = a.min_points;
  if (!a.regions.empty()) cfg.regions = read_regions(a.regions);

  const ParseResult parsed = parse(a.in, cfg);
  std::vector<Trajectory> resampled;
  std::int64_t dropped_short = 0;
  for (const auto& traj : parsed.trajectories) {
    if (auto r = resample(traj, cfg.target_rate)) {
      resampled.push_back(std::move(*r));
    } else {
      dropped_short++;
    }
  }
  std::vector<Trajectory> kept;
  if (cfg.format == DatasetFormat::kEdinburgh) {
    const FilterResult f = filter_edinburgh(resampled, cfg);
    std::cout << "filter: removed " << f.removed_outside_marginal
              << " outside marginal, " << f.removed_short << " short, "
              << f.removed_lift << " lift-to-lift\n";
    kept = f.kept;
  } else {
    kept = std::move(resampled);
  }
  write_generic_file(kept, a.out);

  json cfg_json;
  cfg_json["format"] = a.format;
  cfg_json["unit_scale"] = cfg.unit_scale;
  cfg_json["target_rate"] = cfg.target_rate;
  cfg_json["min_points"] = cfg.min_points;
  cfg_json["regions"] = a.regions;
  std::vector<fs::path> inputs{a.in};
  if (!a.regions.empty()) inputs.push_back(a.regions);
  write_manifest(a.out, "convert", cfg_json, inputs);
  std::cout << "parsed " << parsed.trajectories.size() << " trajectories ("
            << parsed.skipped_rows << " rows skipped), dropped "
            << dropped_short << " too short, wrote " << kept.size() << " to "
            << a.out << "\n";
  return 0;
}

// --- build-mod ---

struct BuildArgs {
  std::string type = "cliff";
  std::string in, out;
  std::string profile;
  double resolution = 0.0;
  double interval = 3600.0;
  int bins = 8;
  double t_interval = 600.0;
  int m = 2;
  int harmonics = 24;
  std::uint64_t seed = 12345;
  int min_observations = 10;
  int max_components = 5;
  int workers = default_workers();
};

int cmd_build_mod(const BuildArgs& a) {
  const Profile prof = profile_of(a.profile);
  const double resolution =
      a.resolution > 0.0 ? a.resolution : prof.resolution;
  const auto trajs = load_generic(a.in);

  EMConfig em;
  em.seed = a.seed;
  em.min_observations = a.min_observations;
  em.max_components = a.max_components;

  json cfg;
  cfg["type"] = a.type;
  cfg["resolution"] = resolution;
  cfg["seed"] = a.seed;
  cfg["workers"] = a.workers;

  if (a.type == "cliff") {
    const CLiFFMap map = build_cliff_map(trajs, resolution, em, a.workers);
    if (map.empty()) std::cerr << "warning: map has no occupied cells\n";
    write_cliff_map(map, a.out);
    cfg["min_observations"] = em.min_observations;
    cfg["max_components"] = em.max_components;
    write_manifest(a.out, "build-mod", cfg, {a.in});
    std::cout << "cliff map: " << map.locations.size() << " cells\n";
  } else if (a.type == "tc_cliff") {
    const TCCLiFFMap map =
        build_tc_cliff_map(trajs, resolution, a.interval, em, a.workers);
    if (map.interval_maps.empty()) {
      std::cerr << "warning: map has no occupied intervals\n";
    }
    fs::create_directories(a.out);
    write_tc_cliff_map(map, a.out);
    cfg["interval"] = a.interval;
    cfg["min_observations"] = em.min_observations;
    cfg["max_components"] = em.max_components;
    write_manifest(a.out, "build-mod", cfg, {a.in});
    std::cout << "tc cliff map: " << map.interval_maps.size()
              << " interval maps";
    for (const auto& [idx, m] : map.interval_maps) {
      std::cout << " [" << idx << ": " << m.locations.size() << " cells]";
    }
    std::cout << "\n";
  } else if (a.type == "stef") {
    const auto freqs = daily_harmonics(a.harmonics);
    const STeFMap map =
        build_stef_map(trajs, resolution, a.bins, a.t_interval, a.m, freqs);
    if (map.cells.empty()) std::cerr << "warning: map has no occupied cells\n";
    write_stef_map(map, a.out);
    cfg["bins"] = a.bins;
    cfg["t_interval"] = a.t_interval;
    cfg["m"] = a.m;
    cfg["harmonics"] = a.harmonics;
    write_manifest(a.out, "build-mod", cfg, {a.in});
    std::cout << "stef map: " << map.cells.size() << " cells\n";
  } else {
    throw ConfigError("unknown map type: " + a.type);
  }
  return 0;
}

// --- map loading shared by predict / evaluate ---

struct LoadedMap {
  std::optional<CLiFFMap> cliff;
  std::optional<TCCLiFFMap> tc;
  std::optional<STeFMap> stef;

  MoDSampler sampler(double r_s) const {
    if (cliff) return make_cliff_sampler(*cliff, r_s);
    if (tc) return make_tc_cliff_sampler(*tc, r_s);
    if (stef) return make_stef_sampler(*stef, r_s);
    return nullptr;  // cvm baseline
  }
};

LoadedMap load_map(const std::string& type, const std::string& path) {
  LoadedMap m;
  if (type == "cliff") {
    m.cliff = read_cliff_map(path);
  } else if (type == "tc_cliff") {
    m.tc = read_tc_cliff_map(path);
  } else if (type == "stef") {
    m.stef = read_stef_map(path);
  } else if (type != "cvm") {
    throw ConfigError("unknown method type: " + type);
  }
  return m;
}

// --- predict ---

struct PredictArgs {
  std::string type = "cliff";
  std::string map, in, out;
  std::string profile;
  std::string stop_policy = "truncate";
  double obs_horizon = 0.0;
  double horizon = 0.0;
  double dt = 0.0;
  double beta = 0.0;
  double r_s = 0.0;
  int k = 5;
  std::uint64_t seed = 0;
  bool advance_time = false;
};

PredictorParams resolve_params(const Profile& prof, double horizon, double dt,
                               double beta, double r_s, int k,
                               const std::string& stop_policy,
                               bool advance_time) {
  PredictorParams p;
  p.dt = dt > 0.0 ? dt : prof.dt;
  const double h = horizon > 0.0 ? horizon : prof.max_horizon_s;
  p.T_p = static_cast<int>(std::llround(h / p.dt));
  p.beta = beta > 0.0 ? beta : prof.beta;
  p.r_s = r_s > 0.0 ? r_s : prof.r_s;
  p.k = k;
  p.advance_time = advance_time;
  if (stop_policy == "truncate") {
    p.stop_policy = StopPolicy::kTruncate;
  } else if (stop_policy == "cvm_continue") {
    p.stop_policy = StopPolicy::kCvmContinue;
  } else {
    throw ConfigError("unknown stop policy: " + stop_policy);
  }
  return p;
}

int cmd_predict(const PredictArgs& a) {
  const Profile prof = profile_of(a.profile);
  const PredictorParams params =
      resolve_params(prof, a.horizon, a.dt, a.beta, a.r_s, a.k, a.stop_policy,
                     a.advance_time);
  const double obs_s = a.obs_horizon > 0.0 ? a.obs_horizon : prof.obs_horizon_s;
  const int O_p = static_cast<int>(std::llround(obs_s / params.dt));

  const LoadedMap map = load_map(a.type, a.map);
  const MoDSampler sampler = map.sampler(params.r_s);
  const auto trajs = load_generic(a.in);
  const auto cases = make_cases(trajs, O_p, params.T_p);

  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot write " + a.out);
  out << "case,rank,log_fitness,step,x_m,y_m,speed_mps,heading_rad\n";
  for (size_t i = 0; i < cases.size(); ++i) {
    Rng rng(mix_seed(a.seed, static_cast<std::uint64_t>(i)));
    std::vector<PredictionResult> rollouts;
    if (sampler) {
      rollouts = predict_ranked(cases[i].observation, sampler, params,
                                cases[i].start_time, rng);
    } else {
      rollouts.push_back(cvm_predict(cases[i].observation, params.T_p,
                                     params.dt, params.obs_sigma,
                                     params.normalize_obs_weights));
    }
    for (size_t r = 0; r < rollouts.size(); ++r) {
      if (rollouts[r].states.empty()) {
        std::cerr << "warning: case " << i << " rollout " << r
                  << " found no dynamics data\n";
        continue;
      }
      for (size_t s = 0; s < rollouts[r].states.size(); ++s) {
        const State& st = rollouts[r].states[s];
        out << i << "," << r << "," << fmt_double(rollouts[r].log_fitness)
            << "," << (s + 1) << "," << fmt_double(st.x) << ","
            << fmt_double(st.y) << "," << fmt_double(st.speed) << ","
            << fmt_double(st.heading) << "\n";
      }
    }
  }
  out.close();

  json cfg;
  cfg["type"] = a.type;
  cfg["map"] = a.map;
  cfg["seed"] = a.seed;
  cfg["obs_horizon_s"] = obs_s;
  cfg["horizon_s"] = params.T_p * params.dt;
  cfg["dt"] = params.dt;
  cfg["beta"] = params.beta;
  cfg["r_s"] = params.r_s;
  cfg["k"] = params.k;
  cfg["stop_policy"] = a.stop_policy;
  cfg["advance_time"] = params.advance_time;
  std::vector<fs::path> inputs{a.in};
  if (!a.map.empty() && fs::is_regular_file(a.map)) inputs.push_back(a.map);
  write_manifest(a.out, "predict", cfg, inputs);
  std::cout << "predicted " << cases.size() << " cases to " << a.out << "\n";
  return 0;
}

// --- evaluate ---

struct EvaluateArgs {
  std::vector<std::string> methods;  // "cliff:map.txt" or "cvm"
  std::string in, out, per_case, dataset = "synthetic";
  std::string profile;
  std::string horizons;
  std::string stop_policy = "truncate";
  std::string selection = "most_likely";
  double obs_horizon = 0.0;
  double horizon = 0.0;
  double dt = 0.0;
  double beta = 0.0;
  double r_s = 0.0;
  int k = 5;
  std::uint64_t seed = 0;
  int workers = default_workers();
  bool advance_time = false;
  bool rerank = false;
};

int cmd_evaluate(const EvaluateArgs& a) {
  if (a.methods.empty()) throw ConfigError("no methods given");
  const Profile prof = profile_of(a.profile);
  const PredictorParams params =
      resolve_params(prof, a.horizon, a.dt, a.beta, a.r_s, a.k, a.stop_policy,
                     a.advance_time);
  const double obs_s = a.obs_horizon > 0.0 ? a.obs_horizon : prof.obs_horizon_s;
  const int O_p = static_cast<int>(std::llround(obs_s / params.dt));
  const auto horizons = parse_horizons(a.horizons, params.T_p * params.dt);

  EvalOptions opts;
  opts.seed = a.seed;
  opts.workers = a.workers;
  opts.per_horizon_rerank = a.rerank;
  if (a.selection == "most_likely") {
    opts.selection = Selection::kMostLikely;
  } else if (a.selection == "mean_over_k") {
    opts.selection = Selection::kMeanOverK;
  } else {
    throw ConfigError("unknown selection: " + a.selection);
  }

  const auto trajs = load_generic(a.in);
  const auto cases = make_cases(trajs, O_p, params.T_p);
  if (cases.empty()) throw std::runtime_error("no evaluable cases in " + a.in);

  std::ofstream out(a.out);
  if (!out) throw std::runtime_error("cannot write " + a.out);
  out << "method,dataset,horizon_s,n_cases,ade_mean,ade_std,fde_mean,"
         "fde_std,mean_runtime_ms\n";
  std::ofstream per_case;
  if (!a.per_case.empty()) {
    per_case.open(a.per_case);
    if (!per_case) throw std::runtime_error("cannot write " + a.per_case);
    per_case << "method,case,horizon_s,ade,fde,runtime_ms\n";
  }

  std::vector<fs::path> inputs{a.in};
  for (const auto& spec : a.methods) {
    const auto colon = spec.find(':');
    const std::string type = spec.substr(0, colon);
    const std::string path =
        colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (type != "cvm" && path.empty()) {
      throw ConfigError("method needs a map path: " + spec);
    }
    const LoadedMap map = load_map(type, path);
    const MoDSampler sampler = map.sampler(params.r_s);
    const EvalReport report = evaluate(cases, sampler, params, horizons, opts);
    for (const auto& row : report.rows) {
      out << type << "," << a.dataset << "," << fmt3(row.horizon) << ","
          << row.n_cases << "," << fmt3(row.ade_mean) << ","
          << fmt3(row.ade_std) << "," << fmt3(row.fde_mean) << ","
          << fmt3(row.fde_std) << "," << fmt3(report.mean_runtime_ms) << "\n";
    }
    if (per_case.is_open()) {
      for (const auto& rec : report.per_case) {
        per_case << type << "," << rec.case_index << "," << fmt3(rec.horizon)
                 << "," << fmt3(rec.ade) << "," << fmt3(rec.fde) << ","
                 << fmt3(rec.runtime_ms) << "\n";
      }
    }
    if (report.skipped_cases > 0) {
      std::cerr << "warning: " << type << ": " << report.skipped_cases
                << " cases had no dynamics data\n";
    }
    std::cout << type << ": " << cases.size() << " cases, mean runtime "
              << fmt3(report.mean_runtime_ms) << " ms\n";
    if (!path.empty() && fs::is_regular_file(path)) inputs.push_back(path);
  }
  out.close();
  if (per_case.is_open()) per_case.close();

  json cfg;
  cfg["methods"] = a.methods;
  cfg["dataset"] = a.dataset;
  cfg["seed"] = a.seed;
  cfg["obs_horizon_s"] = obs_s;
  cfg["horizon_s"] = params.T_p * params.dt;
  cfg["dt"] = params.dt;
  cfg["beta"] = params.beta;
  cfg["r_s"] = params.r_s;
  cfg["k"] = params.k;
  cfg["selection"] = a.selection;
  cfg["rerank"] = a.rerank;
  cfg["stop_policy"] = a.stop_policy;
  cfg["advance_time"] = params.advance_time;
  cfg["workers"] = a.workers;
  json hs = json::array();
  for (double h : horizons) hs.push_back(h);
  cfg["horizons"] = hs;
  write_manifest(a.out, "evaluate", cfg, inputs);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maps-of-dynamics long-horizon human motion prediction"};
  app.require_subcommand(1);
  app.set_config("--config");

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate synthetic trajectories");
  s->add_option("--scenario", synth.scenario,
                "corridor | bend | bimodal | time_varying");
  s->add_option("--out", synth.out, "Output trajectory file")->required();
  s->add_option("--seed", synth.seed, "RNG seed");
  s->add_option("--n", synth.params.n_trajectories, "Trajectory count");
  s->add_option("--dt", synth.params.dt, "Sample spacing, s");
  s->add_option("--speed", synth.params.speed, "Walking speed, m/s");
  s->add_option("--noise", synth.params.noise, "Position noise sigma, m");
  s->add_option("--lateral-spread", synth.params.lateral_spread,
                "Lateral offset half-range, m");
  s->add_option("--corridor-length", synth.params.corridor_length, "m");
  s->add_option("--leg-length", synth.params.leg_length, "Bend leg, m");
  s->add_option("--bend-radius", synth.params.bend_radius, "m");
  s->add_option("--region-size", synth.params.region_size, "Bimodal area, m");
  s->add_option("--bimodal-fraction", synth.params.bimodal_fraction,
                "Major flow share");
  s->add_option("--heading-a", synth.params.bimodal_heading_a, "rad");
  s->add_option("--heading-b", synth.params.bimodal_heading_b, "rad");
  s->add_option("--flip-period", synth.params.flip_period,
                "Direction flip period, s");
  s->add_option("--n-days", synth.params.n_days, "Time-varying span, days");
  s->add_option("--speed-a", synth.params.speed_a, "Even-phase speed, m/s");
  s->add_option("--speed-b", synth.params.speed_b, "Odd-phase speed, m/s");
  s->add_flag("--curved", synth.params.curved, "Bend geometry for time_varying");
  s->add_option("--base-time", synth.params.base_time, "Epoch offset, s");
  s->add_option("--time-spread", synth.params.time_spread,
                "Start time spread, s");

  ConvertArgs conv;
  auto* c = app.add_subcommand("convert", "Convert a dataset to the generic format");
  c->add_option("--format", conv.format, "atc | edinburgh | generic");
  c->add_option("--in", conv.in, "Input log")->required();
  c->add_option("--out", conv.out, "Output trajectory file")->required();
  c->add_option("--unit-scale", conv.unit_scale, "Meters per source unit");
  c->add_option("--rate", conv.rate, "Resample rate, Hz");
  c->add_option("--min-points", conv.min_points, "Minimum trajectory length");
  c->add_option("--regions", conv.regions, "Region polygon file");
  c->add_option("--profile", conv.profile, "atc | edinburgh defaults");

  BuildArgs build;
  auto* b = app.add_subcommand("build-mod", "Build a map of dynamics");
  b->add_option("--type", build.type, "cliff | tc_cliff | stef");
  b->add_option("--in", build.in, "Training trajectories")->required();
  b->add_option("--out", build.out, "Output map file (directory for tc_cliff)")
      ->required();
  b->add_option("--profile", build.profile, "atc | edinburgh defaults");
  b->add_option("--resolution", build.resolution, "Grid resolution, m");
  b->add_option("--interval", build.interval, "tc_cliff interval length, s");
  b->add_option("--bins", build.bins, "stef orientation bins");
  b->add_option("--t-interval", build.t_interval, "stef time bin, s");
  b->add_option("--m", build.m, "stef spectral components per bin");
  b->add_option("--harmonics", build.harmonics, "stef daily harmonics");
  b->add_option("--seed", build.seed, "EM seed");
  b->add_option("--min-observations", build.min_observations,
                "Minimum samples per cell");
  b->add_option("--max-components", build.max_components,
                "Mixture size ceiling");
  b->add_option("--workers", build.workers, "Parallel cell fits");

  PredictArgs pred;
  auto* p = app.add_subcommand("predict", "Ranked rollouts for each case");
  p->add_option("--type", pred.type, "cliff | tc_cliff | stef | cvm");
  p->add_option("--map", pred.map, "Map file or directory");
  p->add_option("--in", pred.in, "Trajectories to predict")->required();
  p->add_option("--out", pred.out, "Predictions file")->required();
  p->add_option("--profile", pred.profile, "atc | edinburgh defaults");
  p->add_option("--obs", pred.obs_horizon, "Observation horizon, s");
  p->add_option("--horizon", pred.horizon, "Prediction horizon, s");
  p->add_option("--dt", pred.dt, "Prediction step, s");
  p->add_option("--beta", pred.beta, "Kernel parameter");
  p->add_option("--radius", pred.r_s, "Sampling radius, m");
  p->add_option("--k", pred.k, "Rollouts per case");
  p->add_option("--seed", pred.seed, "RNG seed");
  p->add_option("--stop-policy", pred.stop_policy, "truncate | cvm_continue");
  p->add_flag("--advance-time", pred.advance_time,
              "Advance the wall clock during rollouts");

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Score methods against ground truth");
  e->add_option("--method", ev.methods,
                "type:map_path (cvm needs no path); repeatable")
      ->required();
  e->add_option("--in", ev.in, "Test trajectories")->required();
  e->add_option("--out", ev.out, "Results table")->required();
  e->add_option("--per-case", ev.per_case, "Per-case log file");
  e->add_option("--dataset", ev.dataset, "Dataset label in the output");
  e->add_option("--profile", ev.profile, "atc | edinburgh defaults");
  e->add_option("--horizons", ev.horizons, "Comma list of horizons, s");
  e->add_option("--obs", ev.obs_horizon, "Observation horizon, s");
  e->add_option("--horizon", ev.horizon, "Max prediction horizon, s");
  e->add_option("--dt", ev.dt, "Prediction step, s");
  e->add_option("--beta", ev.beta, "Kernel parameter");
  e->add_option("--radius", ev.r_s, "Sampling radius, m");
  e->add_option("--k", ev.k, "Rollouts per case");
  e->add_option("--seed", ev.seed, "RNG seed");
  e->add_option("--selection", ev.selection, "most_likely | mean_over_k");
  e->add_flag("--rerank", ev.rerank, "Re-rank fitness within each horizon");
  e->add_option("--stop-policy", ev.stop_policy, "truncate | cvm_continue");
  e->add_flag("--advance-time", ev.advance_time,
              "Advance the wall clock during rollouts");
  e->add_option("--workers", ev.workers, "Parallel case evaluation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (s->parsed()) return cmd_synth(synth);
    if (c->parsed()) return cmd_convert(conv);
    if (b->parsed()) return cmd_build_mod(build);
    if (p->parsed()) return cmd_predict(pred);
    if (e->parsed()) return cmd_evaluate(ev);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& err) {
    std::cerr << "parse error: " << err.what() << "\n";
    return kExitParse;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
