#include "ganlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <thread>

#include "ganlab/asymptotics.hpp"
#include "ganlab/criterion.hpp"
#include "ganlab/error.hpp"
#include "json.hpp"

namespace ganlab {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct KindName {
  ExperimentKind kind;
  const char* name;
};
constexpr KindName kKinds[] = {
    {ExperimentKind::DepthSweep, "depth-sweep"}, {ExperimentKind::Consistency, "consistency"},
    {ExperimentKind::Clt, "clt"},                {ExperimentKind::Fit, "fit"},
    {ExperimentKind::ThetaStar, "theta-star"},   {ExperimentKind::Variance, "variance"},
};

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

bool is_mlp_name(std::string_view model) { return model.rfind("mlp-", 0) == 0; }

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Runs f(i) for i in [0, count) on a pool; results must go to slot i.
template <class F>
void parallel_for(std::size_t count, std::size_t workers, F&& f) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) f(i);
    });
  for (auto& t : pool) t.join();
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const ExperimentConfig& cfg, const std::string& header) : out_(path) {
    if (!out_) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
    out_ << "# ganlab " << to_string(cfg.kind) << " config_hash=" << cfg.hash() << '\n' << header << '\n';
  }
  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cells, first = false), ...);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

fs::path prepare_dir(const ExperimentConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) config_error("cannot create output directory " + dir.string());
  return dir;
}

void write_summary(ExperimentOutput& out, const fs::path& dir, const ExperimentConfig& cfg, json summary) {
  summary["config"] = json::parse(cfg.to_json());
  summary["config_hash"] = cfg.hash();
  out.summary_json = summary.dump(2);
  const fs::path path = dir / (std::string(to_string(cfg.kind)) + "_summary.json");
  std::ofstream(path) << out.summary_json << '\n';
  out.files.push_back(path);
}

json vec_json(const Vector& v) { return json(v); }

struct Sample {
  Vector xs, zs;
};

Sample draw_data(const AdversarialProblem& p, std::size_t n, std::uint64_t seed) {
  SeededRng rng(seed);
  Sample s;
  s.xs = p.target->sample(rng, n);
  s.zs.resize(n);
  for (double& z : s.zs) z = rng.uniform();
  return s;
}

TrainConfig train_config_for(const AdversarialProblem& p, std::uint64_t seed, const TrainOverrides& o) {
  TrainConfig cfg = default_train_config(p);
  cfg.seed = mix_seed(seed, 0x7a1);
  o.apply(cfg);
  return cfg;
}

RunRecord train_record(const AdversarialProblem& p, const std::string& experiment, const std::string& model,
                       std::size_t n, std::size_t rep, std::uint64_t seed, const TrainOverrides& o) {
  RunRecord r;
  r.experiment = experiment;
  r.model = model;
  r.n = n;
  r.rep = rep;
  r.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const FitResult fit = fit_once(p, n, seed, o);
    r.theta_hat = fit.theta_hat;
    r.alpha_hat = fit.alpha_hat;
    r.converged = fit.converged;
  } catch (const std::exception& e) {
    r.failed = true;
    r.failure = e.what();
  }
  r.wall_seconds = elapsed(t0);
  return r;
}

double theta_or_nan(const RunRecord& r) { return r.failed ? kNaN : r.theta_hat[0]; }

Vector ok_thetas(const std::vector<RunRecord>& recs, std::size_t n) {
  Vector v;
  for (const auto& r : recs)
    if (r.n == n && !r.failed) v.push_back(r.theta_hat[0]);
  return v;
}

double std_dev(const Vector& v) { return v.size() >= 2 ? std::sqrt(sample_moments(v).variance) : kNaN; }

double median_shift(Vector v, double center) {
  if (v.empty() || std::isnan(center)) return kNaN;
  for (double& x : v) x -= center;
  return sample_quantile(std::move(v), 0.5);
}

double total_wall(const std::vector<RunRecord>& recs) {
  double t = 0.0;
  for (const auto& r : recs) t += r.wall_seconds;
  return t;
}

std::size_t failures(const std::vector<RunRecord>& recs) {
  return static_cast<std::size_t>(std::count_if(recs.begin(), recs.end(), [](const RunRecord& r) { return r.failed; }));
}

// Fits (model, n, rep) for every n and rep; results ordered by (n, rep).
std::vector<RunRecord> replicate(const ExperimentConfig& cfg, const AdversarialProblem& p, const std::string& model) {
  const std::size_t reps = cfg.repetitions;
  const std::size_t count = cfg.sample_sizes.size() * reps;
  std::vector<RunRecord> recs(count);
  parallel_for(count, cfg.workers, [&](std::size_t i) {
    const std::size_t n = cfg.sample_sizes[i / reps], rep = i % reps;
    recs[i] = train_record(p, std::string(to_string(cfg.kind)), model, n, rep,
                           repetition_seed(cfg.base_seed, rep), cfg.train);
  });
  return recs;
}

void require_closed_form(const ExperimentConfig& cfg) {
  for (const auto& m : cfg.models)
    if (is_mlp_name(m)) config_error(std::string(to_string(cfg.kind)) + " needs closed-form models, got " + m);
}

}  // namespace

// ---------------------------------------------------------------------------
// Names and configuration
// ---------------------------------------------------------------------------

std::string_view to_string(ExperimentKind k) {
  for (const auto& kn : kKinds)
    if (kn.kind == k) return kn.name;
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (const auto& kn : kKinds)
    if (name == kn.name) return kn.kind;
  config_error("unknown experiment kind '" + std::string(name) + "'");
}

Scale parse_scale(std::string_view name) {
  if (name == "desk") return Scale::Desk;
  if (name == "paper") return Scale::Paper;
  config_error("unknown scale '" + std::string(name) + "' (desk|paper)");
}

void TrainOverrides::apply(TrainConfig& cfg) const {
  if (discriminator_steps) cfg.discriminator_steps = *discriminator_steps;
  if (generator_steps) cfg.generator_steps = *generator_steps;
  if (rounds) cfg.rounds = *rounds;
  if (lr_discriminator) cfg.lr_discriminator = *lr_discriminator;
  if (lr_generator) cfg.lr_generator = *lr_generator;
  if (convergence_tol) cfg.convergence_tol = *convergence_tol;
  if (optimizer) cfg.optimizer = *optimizer;
  if (use_log_trick) cfg.use_log_trick = *use_log_trick;
  if (random_init) cfg.random_init = *random_init;
  if (init_theta) cfg.init_theta = *init_theta;
  if (init_alpha) cfg.init_alpha = *init_alpha;
}

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind, Scale scale) {
  ExperimentConfig c;
  c.kind = kind;
  const bool paper = scale == Scale::Paper;
  const std::vector<std::string> table1{"laplace-gaussian", "claw-gaussian", "exponential-uniform"};
  switch (kind) {
    case ExperimentKind::DepthSweep:
      c.gen_depths = paper ? std::vector<std::size_t>{2, 3} : std::vector<std::size_t>{3};
      c.disc_depths = paper ? std::vector<std::size_t>{2, 3, 4, 5} : std::vector<std::size_t>{2, 5};
      c.sample_sizes = {paper ? 100000u : 10000u};
      c.repetitions = paper ? 30 : 10;
      break;
    case ExperimentKind::Consistency:
      c.models = table1;
      c.sample_sizes = {10, 100, 1000, 10000};
      c.repetitions = 200;
      break;
    case ExperimentKind::Clt:
      c.models = table1;
      c.sample_sizes = paper ? std::vector<std::size_t>{100, 1000, 10000} : std::vector<std::size_t>{10000};
      c.repetitions = 200;
      c.mc_n = paper ? 1000000 : 100000;
      break;
    case ExperimentKind::Fit:
      c.models = table1;
      c.sample_sizes = {10000};
      c.repetitions = 1;
      break;
    case ExperimentKind::ThetaStar:
      c.models = table1;
      c.models.insert(c.models.begin(), "gaussian-gaussian");
      c.sample_sizes = {};
      break;
    case ExperimentKind::Variance:
      c.models = table1;
      c.models.insert(c.models.begin(), "gaussian-gaussian");
      c.mc_n = paper ? 1000000 : 100000;
      break;
  }
  c.output_dir = "out/" + std::string(to_string(kind));
  return c;
}

void ExperimentConfig::validate() const {
  if (repetitions < 1) config_error("repetitions must be >= 1");
  for (std::size_t i = 0; i < sample_sizes.size(); ++i) {
    if (sample_sizes[i] == 0) config_error("sample sizes must be positive");
    if (i > 0 && sample_sizes[i] <= sample_sizes[i - 1]) config_error("sample sizes must be strictly ascending");
  }
  const bool needs_n = kind == ExperimentKind::DepthSweep || kind == ExperimentKind::Consistency ||
                       kind == ExperimentKind::Clt || kind == ExperimentKind::Fit;
  if (needs_n && sample_sizes.empty()) config_error("sample_sizes must not be empty");
  if (kind == ExperimentKind::DepthSweep) {
    if (gen_depths.empty() || disc_depths.empty()) config_error("depth sweep needs gen_depths and disc_depths");
    for (auto d : gen_depths)
      if (d < 1 || d > 8) config_error("generator depth must be in [1, 8]");
    for (auto d : disc_depths)
      if (d < 1 || d > 8) config_error("discriminator depth must be in [1, 8]");
    if (js_draws < 10000) config_error("js_draws must be >= 10000");
  } else {
    if (models.empty()) config_error("models must not be empty");
    for (const auto& m : models) {
      try {
        experiment_problem(m);
      } catch (const Error& e) {
        config_error(e.what());
      }
    }
  }
  if (kind == ExperimentKind::Consistency || kind == ExperimentKind::Clt || kind == ExperimentKind::ThetaStar ||
      kind == ExperimentKind::Variance)
    require_closed_form(*this);
  if (kind == ExperimentKind::Clt && repetitions < 100) config_error("clt needs >= 100 repetitions");
  if ((kind == ExperimentKind::Clt || kind == ExperimentKind::Variance) && mc_n < 10000)
    config_error("mc_n must be >= 10000");
  if (kind == ExperimentKind::Fit && js_draws < 10000) config_error("js_draws must be >= 10000");
  TrainConfig probe;
  train.apply(probe);
  try {
    probe.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
}

namespace {

template <class T>
T get_as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    config_error("config key '" + key + "' has the wrong type");
  }
}

std::size_t get_count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    config_error("config key '" + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

std::vector<std::size_t> get_counts(const json& v, const std::string& key) {
  if (!v.is_array()) config_error("config key '" + key + "' must be an array");
  std::vector<std::size_t> out;
  for (const auto& e : v) out.push_back(get_count(e, key));
  return out;
}

double get_real(const json& v, const std::string& key) {
  if (!v.is_number()) config_error("config key '" + key + "' must be a number");
  return v.get<double>();
}

TrainOverrides parse_train(const json& j) {
  if (!j.is_object()) config_error("config key 'train' must be an object");
  TrainOverrides o;
  for (const auto& [key, v] : j.items()) {
    if (key == "discriminator_steps") o.discriminator_steps = get_count(v, key);
    else if (key == "generator_steps") o.generator_steps = get_count(v, key);
    else if (key == "rounds") o.rounds = get_count(v, key);
    else if (key == "lr_discriminator") o.lr_discriminator = get_real(v, key);
    else if (key == "lr_generator") o.lr_generator = get_real(v, key);
    else if (key == "convergence_tol") o.convergence_tol = get_real(v, key);
    else if (key == "optimizer") {
      try {
        o.optimizer = parse_optimizer(get_as<std::string>(v, key));
      } catch (const Error& e) {
        config_error(e.what());
      }
    } else if (key == "use_log_trick") o.use_log_trick = get_as<bool>(v, key);
    else if (key == "random_init") o.random_init = get_as<bool>(v, key);
    else if (key == "init_theta") o.init_theta = get_as<Vector>(v, key);
    else if (key == "init_alpha") o.init_alpha = get_as<Vector>(v, key);
    else config_error("unknown config key 'train." + key + "'");
  }
  return o;
}

json train_json(const TrainOverrides& o) {
  json j = json::object();
  if (o.discriminator_steps) j["discriminator_steps"] = *o.discriminator_steps;
  if (o.generator_steps) j["generator_steps"] = *o.generator_steps;
  if (o.rounds) j["rounds"] = *o.rounds;
  if (o.lr_discriminator) j["lr_discriminator"] = *o.lr_discriminator;
  if (o.lr_generator) j["lr_generator"] = *o.lr_generator;
  if (o.convergence_tol) j["convergence_tol"] = *o.convergence_tol;
  if (o.optimizer) j["optimizer"] = std::string(to_string(*o.optimizer));
  if (o.use_log_trick) j["use_log_trick"] = *o.use_log_trick;
  if (o.random_init) j["random_init"] = *o.random_init;
  if (o.init_theta) j["init_theta"] = *o.init_theta;
  if (o.init_alpha) j["init_alpha"] = *o.init_alpha;
  return j;
}

json config_json(const ExperimentConfig& c, bool with_io) {
  json j;
  j["kind"] = std::string(to_string(c.kind));
  j["models"] = c.models;
  j["gen_depths"] = c.gen_depths;
  j["disc_depths"] = c.disc_depths;
  j["sample_sizes"] = c.sample_sizes;
  j["repetitions"] = c.repetitions;
  j["base_seed"] = c.base_seed;
  j["train"] = train_json(c.train);
  j["mc_n"] = c.mc_n;
  j["js_draws"] = c.js_draws;
  j["synthetic"] = c.synthetic;
  if (with_io) {
    j["output_dir"] = c.output_dir;
    j["workers"] = c.workers;
  }
  return j;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(std::string_view text, std::optional<ExperimentKind> expected,
                                             std::optional<Scale> scale) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");

  std::optional<ExperimentKind> kind = expected;
  if (j.contains("kind")) {
    const auto k = parse_experiment_kind(get_as<std::string>(j["kind"], "kind"));
    if (kind && *kind != k) config_error("config kind does not match the requested experiment");
    kind = k;
  }
  if (!kind) config_error("experiment kind missing");
  if (!scale) scale = j.contains("scale") ? parse_scale(get_as<std::string>(j["scale"], "scale")) : Scale::Desk;

  ExperimentConfig c = defaults(*kind, *scale);
  for (const auto& [key, v] : j.items()) {
    if (key == "kind" || key == "scale") continue;
    if (key == "models") c.models = get_as<std::vector<std::string>>(v, key);
    else if (key == "model") c.models = {get_as<std::string>(v, key)};
    else if (key == "gen_depths") c.gen_depths = get_counts(v, key);
    else if (key == "disc_depths") c.disc_depths = get_counts(v, key);
    else if (key == "sample_sizes") c.sample_sizes = get_counts(v, key);
    else if (key == "repetitions") c.repetitions = get_count(v, key);
    else if (key == "base_seed") c.base_seed = get_count(v, key);
    else if (key == "train") c.train = parse_train(v);
    else if (key == "mc_n") c.mc_n = get_count(v, key);
    else if (key == "js_draws") c.js_draws = get_count(v, key);
    else if (key == "synthetic") c.synthetic = get_as<bool>(v, key);
    else if (key == "output_dir") c.output_dir = get_as<std::string>(v, key);
    else if (key == "workers") c.workers = get_count(v, key);
    else config_error("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

std::string ExperimentConfig::to_json() const { return config_json(*this, true).dump(); }

std::string ExperimentConfig::hash() const {
  const std::string canon = config_json(*this, false).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Shared pieces
// ---------------------------------------------------------------------------

AdversarialProblem experiment_problem(std::string_view model) {
  if (is_mlp_name(model)) {
    unsigned g = 0, d = 0;
    char tail = 0;
    const std::string s(model);
    if (std::sscanf(s.c_str(), "mlp-g%u-d%u%c", &g, &d, &tail) != 2 || g < 1 || d < 1 || g > 8 || d > 8)
      throw Error(ErrorCode::UnknownModel, "bad neural model name '" + s + "' (expected mlp-g<k>-d<m>)");
    return neural_problem(g, d);
  }
  return make_model(model);
}

TrainConfig default_train_config(const AdversarialProblem& p) {
  return dynamic_cast<const MlpGenerator*>(p.generators.get()) ? TrainConfig::mlp_defaults()
                                                               : TrainConfig::table1_defaults();
}

std::uint64_t repetition_seed(std::uint64_t base_seed, std::size_t rep) { return mix_seed(base_seed, rep); }

FitResult fit_once(const AdversarialProblem& p, std::size_t n, std::uint64_t seed, const TrainOverrides& overrides) {
  const Sample s = draw_data(p, n, seed);
  return train_gan(p, s.xs, s.zs, train_config_for(p, seed, overrides));
}

// ---------------------------------------------------------------------------
// Depth sweep
// ---------------------------------------------------------------------------

ExperimentOutput run_depth_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir = prepare_dir(cfg);
  const std::size_t n = cfg.sample_sizes.front(), reps = cfg.repetitions;
  struct Cell {
    std::size_t g, d;
  };
  std::vector<Cell> cells;
  for (auto g : cfg.gen_depths)
    for (auto d : cfg.disc_depths) cells.push_back({g, d});

  ExperimentOutput out;
  out.records.resize(cells.size() * reps);
  parallel_for(out.records.size(), cfg.workers, [&](std::size_t i) {
    const Cell c = cells[i / reps];
    const std::size_t rep = i % reps;
    const AdversarialProblem p = neural_problem(c.g, c.d);
    // Common data across depths: the seed depends on the repetition only.
    const std::uint64_t seed = repetition_seed(cfg.base_seed, rep);
    RunRecord r = train_record(p, "depth-sweep", p.name, n, rep, seed, cfg.train);
    r.gen_depth = c.g;
    r.disc_depth = c.d;
    if (!r.failed) {
      const auto t0 = std::chrono::steady_clock::now();
      try {
        SeededRng krng(mix_seed(seed, 0x15));
        const auto dens = neural_pushforward_density(*p.generators, r.theta_hat, krng, cfg.js_draws);
        r.js = js_divergence(*p.target, *dens, 1e-8);
      } catch (const std::exception& e) {
        r.failed = true;
        r.failure = e.what();
      }
      r.wall_seconds += elapsed(t0);
    }
    out.records[i] = std::move(r);
  });

  const fs::path rows = dir / "depth_sweep.csv";
  {
    CsvWriter w(rows, cfg, "gen_depth,disc_depth,rep,seed,js_estimate,converged");
    for (const auto& r : out.records)
      w.row(r.gen_depth, r.disc_depth, r.rep, r.seed, fmt(r.failed ? kNaN : r.js), int(r.converged && !r.failed));
  }
  out.files.push_back(rows);

  json cells_json = json::array();
  const fs::path sum_path = dir / "depth_sweep_summary.csv";
  {
    CsvWriter w(sum_path, cfg, "gen_depth,disc_depth,reps_ok,mean_js,sd_js");
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
      Vector js;
      for (std::size_t rep = 0; rep < reps; ++rep) {
        const auto& r = out.records[ci * reps + rep];
        if (!r.failed) js.push_back(r.js);
      }
      const double mean = js.empty() ? kNaN : sample_moments(js).mean;
      const double sd = std_dev(js);
      w.row(cells[ci].g, cells[ci].d, js.size(), fmt(mean), fmt(sd));
      cells_json.push_back({{"gen_depth", cells[ci].g},
                            {"disc_depth", cells[ci].d},
                            {"reps_ok", js.size()},
                            {"mean_js", mean},
                            {"sd_js", sd}});
    }
  }
  out.files.push_back(sum_path);
  write_summary(out, dir, cfg,
                {{"n", n},
                 {"cells", cells_json},
                 {"failures", failures(out.records)},
                 {"wall_seconds", total_wall(out.records)}});
  return out;
}

// ---------------------------------------------------------------------------
// Consistency
// ---------------------------------------------------------------------------

ExperimentOutput run_consistency(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir = prepare_dir(cfg);
  ExperimentOutput out;
  json models = json::object();
  for (const auto& model : cfg.models) {
    const AdversarialProblem p = experiment_problem(model);
    std::vector<RunRecord> recs = replicate(cfg, p, model);

    const fs::path path = dir / ("consistency_" + model + ".csv");
    {
      CsvWriter w(path, cfg, "model,n,rep,seed,theta_hat,converged");
      for (const auto& r : recs) w.row(model, r.n, r.rep, r.seed, fmt(theta_or_nan(r)), int(r.converged));
    }
    out.files.push_back(path);

    const double tb_pop = solve_theta_bar(p).theta_bar[0];
    const Vector largest = ok_thetas(recs, cfg.sample_sizes.back());
    const double tb_avg = largest.empty() ? kNaN : sample_moments(largest).mean;
    json per_n = json::array();
    for (auto n : cfg.sample_sizes) {
      const Vector t = ok_thetas(recs, n);
      const auto conv = std::count_if(recs.begin(), recs.end(),
                                      [&](const RunRecord& r) { return r.n == n && !r.failed && r.converged; });
      per_n.push_back({{"n", n},
                       {"reps_ok", t.size()},
                       {"converged", conv},
                       {"mean", t.empty() ? kNaN : sample_moments(t).mean},
                       {"std", std_dev(t)},
                       {"median_minus_theta_bar_population", median_shift(t, tb_pop)},
                       {"median_minus_theta_bar_average", median_shift(t, tb_avg)}});
    }
    models[model] = {{"theta_bar_population", tb_pop},
                     {"theta_bar_largest_n_average", tb_avg},
                     {"per_n", per_n},
                     {"failures", failures(recs)},
                     {"wall_seconds", total_wall(recs)}};
    out.records.insert(out.records.end(), recs.begin(), recs.end());
  }
  write_summary(out, dir, cfg, {{"models", models}});
  return out;
}

// ---------------------------------------------------------------------------
// CLT
// ---------------------------------------------------------------------------

ExperimentOutput run_clt(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir = prepare_dir(cfg);
  ExperimentOutput out;
  json models = json::object();
  for (const auto& model : cfg.models) {
    const AdversarialProblem p = experiment_problem(model);
    const ThetaBarResult tb = solve_theta_bar(p);
    AsymptoticReport rep = build_asymptotics(p, tb.theta_bar, tb.alpha_bar);
    SeededRng vrng(mix_seed(cfg.base_seed, 0xC17));
    const double V = clt_variance(p, rep, cfg.mc_n, vrng, cfg.workers)(0, 0);
    const double theta_bar = tb.theta_bar[0];

    std::vector<RunRecord> recs;
    if (cfg.synthetic) {
      for (auto n : cfg.sample_sizes)
        for (std::size_t r = 0; r < cfg.repetitions; ++r) {
          RunRecord rec;
          rec.experiment = "clt";
          rec.model = model;
          rec.n = n;
          rec.rep = r;
          rec.seed = repetition_seed(cfg.base_seed, r);
          SeededRng rng(mix_seed(rec.seed, n));
          rec.theta_hat = {theta_bar + std::sqrt(V / static_cast<double>(n)) * rng.normal()};
          rec.converged = true;
          recs.push_back(std::move(rec));
        }
    } else {
      recs = replicate(cfg, p, model);
    }

    const fs::path path = dir / ("clt_" + model + ".csv");
    const fs::path hist_path = dir / ("clt_" + model + "_hist.csv");
    json per_n = json::array();
    {
      CsvWriter w(path, cfg, "model,n,rep,seed,theta_hat,s_standardized");
      CsvWriter h(hist_path, cfg, "n,bin_lo,bin_hi,count");
      for (auto n : cfg.sample_sizes) {
        const double scale = std::sqrt(static_cast<double>(n) / V);
        for (const auto& r : recs)
          if (r.n == n) w.row(model, n, r.rep, r.seed, fmt(theta_or_nan(r)), fmt((theta_or_nan(r) - theta_bar) * scale));
        const Vector t = ok_thetas(recs, n);
        json entry = {{"n", n}, {"reps_ok", t.size()}};
        if (t.size() >= 100) {
          const NormalityReport nr = normality_check(t, theta_bar, n, V);
          for (std::size_t b = 0; b < nr.histogram.size(); ++b)
            h.row(n, fmt(nr.bin_edges[b]), fmt(nr.bin_edges[b + 1]), nr.histogram[b]);
          const double var_ratio = static_cast<double>(n) * sample_moments(t).variance / V;
          entry.update({{"ks_statistic", nr.ks.statistic},
                        {"ks_p_value", nr.ks.p_value},
                        {"skewness", nr.skewness},
                        {"excess_kurtosis", nr.excess_kurtosis},
                        {"degenerate", nr.degenerate},
                        {"n_var_over_V", var_ratio},
                        {"mean_standardized", sample_moments(nr.standardized).mean}});
        } else {
          entry["note"] = "fewer than 100 successful repetitions; normality diagnostics skipped";
        }
        per_n.push_back(entry);
      }
    }
    out.files.push_back(path);
    out.files.push_back(hist_path);
    const Vector largest = ok_thetas(recs, cfg.sample_sizes.back());
    models[model] = {{"theta_bar_population", theta_bar},
                     {"theta_bar_largest_n_average", largest.empty() ? kNaN : sample_moments(largest).mean},
                     {"alpha_bar", vec_json(tb.alpha_bar)},
                     {"V", V},
                     {"HV", rep.HV(0, 0)},
                     {"mc_n", cfg.mc_n},
                     {"synthetic", cfg.synthetic},
                     {"per_n", per_n},
                     {"failures", failures(recs)},
                     {"wall_seconds", total_wall(recs)}};
    out.records.insert(out.records.end(), recs.begin(), recs.end());
  }
  write_summary(out, dir, cfg, {{"models", models}});
  return out;
}

// ---------------------------------------------------------------------------
// Fit snapshot
// ---------------------------------------------------------------------------

ExperimentOutput run_fit_snapshot(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir = prepare_dir(cfg);
  ExperimentOutput out;
  json models = json::object();
  const std::size_t n = cfg.sample_sizes.front();
  for (const auto& model : cfg.models) {
    const AdversarialProblem p = experiment_problem(model);
    const std::uint64_t seed = repetition_seed(cfg.base_seed, 0);
    const Sample s = draw_data(p, n, seed);
    const auto t0 = std::chrono::steady_clock::now();
    const FitResult fit = train_gan(p, s.xs, s.zs, train_config_for(p, seed, cfg.train));

    const auto& gen = *p.generators;
    const auto& disc = *p.discriminators;
    Vector fake(n), fake_init(n);
    for (std::size_t j = 0; j < n; ++j) {
      fake[j] = gen.apply(fit.theta_hat, s.zs[j]);
      fake_init[j] = gen.apply(fit.theta_init, s.zs[j]);
    }
    // Densities of the fitted and initial generators: closed form when
    // available, otherwise a KDE of fresh generator draws.
    auto density_of = [&](const Vector& theta, std::uint64_t salt) -> DensityPtr {
      if (auto d = gen.pushforward(theta)) return d;
      SeededRng krng(mix_seed(seed, salt));
      return neural_pushforward_density(gen, theta, krng, cfg.js_draws);
    };
    const DensityPtr p_hat = density_of(fit.theta_hat, 0x21);
    const DensityPtr p_init = density_of(fit.theta_init, 0x22);

    double lo = kInf, hi = -kInf;
    for (const Vector* v : std::initializer_list<const Vector*>{&s.xs, &fake, &fake_init}) {
      lo = std::min(lo, sample_quantile(*v, 0.001));
      hi = std::max(hi, sample_quantile(*v, 0.999));
    }
    const double pad = 0.1 * (hi - lo);
    lo -= pad;
    hi += pad;

    constexpr std::size_t kGrid = 512;
    const fs::path grid_path = dir / ("fit_" + model + ".csv");
    {
      CsvWriter w(grid_path, cfg, "x,p_star,p_theta_hat,d_alpha_hat,p_theta_init,d_alpha_init");
      for (std::size_t i = 0; i < kGrid; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / (kGrid - 1);
        w.row(fmt(x), fmt(p.target->pdf(x)), fmt(p_hat->pdf(x)), fmt(disc.apply(fit.alpha_hat, x)),
              fmt(p_init->pdf(x)), fmt(disc.apply(fit.alpha_init, x)));
      }
    }
    out.files.push_back(grid_path);

    constexpr std::size_t kBins = 50;
    const fs::path sample_path = dir / ("fit_" + model + "_samples.csv");
    {
      CsvWriter w(sample_path, cfg, "bin_lo,bin_hi,count,hist_density,kde");
      std::vector<std::size_t> counts(kBins, 0);
      const double width = (hi - lo) / kBins;
      for (double g : fake) {
        if (g < lo || g > hi) continue;
        ++counts[std::min<std::size_t>(kBins - 1, static_cast<std::size_t>((g - lo) / width))];
      }
      std::shared_ptr<const KernelDensity> k;
      try {
        k = kde(fake);
      } catch (const Error&) {
        k = nullptr;  // collapsed generator: no spread to smooth
      }
      for (std::size_t b = 0; b < kBins; ++b) {
        const double a = lo + b * width, c = a + 0.5 * width;
        w.row(fmt(a), fmt(a + width), counts[b], fmt(counts[b] / (static_cast<double>(n) * width)),
              fmt(k ? k->pdf(c) : kNaN));
      }
    }
    out.files.push_back(sample_path);

    RunRecord r;
    r.experiment = "fit";
    r.model = model;
    r.n = n;
    r.seed = seed;
    r.theta_hat = fit.theta_hat;
    r.alpha_hat = fit.alpha_hat;
    r.converged = fit.converged;
    r.wall_seconds = elapsed(t0);
    json m = {{"n", n},
              {"seed", seed},
              {"theta_hat", vec_json(fit.theta_hat)},
              {"alpha_hat", vec_json(fit.alpha_hat)},
              {"theta_init", vec_json(fit.theta_init)},
              {"alpha_init", vec_json(fit.alpha_init)},
              {"converged", fit.converged},
              {"grid", {lo, hi}},
              {"wall_seconds", r.wall_seconds}};
    if (!fit.trace.empty()) m["final_criterion_per_sample"] = fit.trace.back().criterion / static_cast<double>(n);
    if (gen.pushforward(fit.theta_hat))
      m["population_criterion_at_fit"] = population_criterion(p, fit.theta_hat, fit.alpha_hat);
    models[model] = m;
    out.records.push_back(std::move(r));
  }
  write_summary(out, dir, cfg, {{"models", models}});
  return out;
}

// ---------------------------------------------------------------------------
// theta-star / theta-bar table and variances
// ---------------------------------------------------------------------------

ExperimentOutput run_theta_star(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir = prepare_dir(cfg);
  ExperimentOutput out;
  const fs::path path = dir / "theta_star.csv";
  json models = json::object();
  {
    CsvWriter w(path, cfg,
                "model,theta_star,js_theta_star,theta_bar,js_theta_bar,js_gap,v_theta_bar,alpha_bar_0,alpha_bar_1");
    for (const auto& model : cfg.models) {
      const AdversarialProblem p = experiment_problem(model);
      const Vector ts = solve_theta_star(p);
      const ThetaBarResult tb = solve_theta_bar(p);
      const double js_s = js_divergence(*p.target, *p.generators->pushforward(ts), 1e-12);
      const double js_b = js_divergence(*p.target, *p.generators->pushforward(tb.theta_bar), 1e-12);
      w.row(model, fmt(ts[0]), fmt(js_s), fmt(tb.theta_bar[0]), fmt(js_b), fmt(js_b - js_s), fmt(tb.value),
            fmt(tb.alpha_bar[0]), fmt(tb.alpha_bar[1]));
      models[model] = {{"theta_star", ts[0]}, {"theta_bar", tb.theta_bar[0]}, {"js_gap", js_b - js_s}};
    }
  }
  out.files.push_back(path);
  write_summary(out, dir, cfg, {{"models", models}});
  return out;
}

ExperimentOutput run_variance(const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir = prepare_dir(cfg);
  ExperimentOutput out;
  const fs::path path = dir / "variance.csv";
  json models = json::object();
  {
    CsvWriter w(path, cfg,
                "model,theta_bar,hv_composed,hv_direct,hv_rel_err,h2l_eig_min,h2l_eig_max,V,mc_n");
    for (const auto& model : cfg.models) {
      const AdversarialProblem p = experiment_problem(model);
      const ThetaBarResult tb = solve_theta_bar(p);
      AsymptoticReport rep = build_asymptotics(p, tb.theta_bar, tb.alpha_bar);
      const double direct = direct_hv(p, tb.theta_bar, tb.alpha_bar)(0, 0);
      SeededRng vrng(mix_seed(cfg.base_seed, 0xC17));
      const double V = clt_variance(p, rep, cfg.mc_n, vrng, cfg.workers)(0, 0);
      const double hv = rep.HV(0, 0);
      const double rel = std::abs(hv - direct) / std::abs(direct);
      w.row(model, fmt(tb.theta_bar[0]), fmt(hv), fmt(direct), fmt(rel), fmt(rep.h2l_eigenvalues.front()),
            fmt(rep.h2l_eigenvalues.back()), fmt(V), cfg.mc_n);
      models[model] = {{"theta_bar", tb.theta_bar[0]},
                       {"hv_composed", hv},
                       {"hv_direct", direct},
                       {"hv_rel_err", rel},
                       {"h2l_eigenvalues", vec_json(rep.h2l_eigenvalues)},
                       {"V", V},
                       {"grad_theta_mean", vec_json(rep.grad1_mean)},
                       {"grad_alpha_mean", vec_json(rep.grad2_mean)}};
    }
  }
  out.files.push_back(path);
  write_summary(out, dir, cfg, {{"models", models}});
  return out;
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.kind) {
    case ExperimentKind::DepthSweep: return run_depth_sweep(cfg);
    case ExperimentKind::Consistency: return run_consistency(cfg);
    case ExperimentKind::Clt: return run_clt(cfg);
    case ExperimentKind::Fit: return run_fit_snapshot(cfg);
    case ExperimentKind::ThetaStar: return run_theta_star(cfg);
    case ExperimentKind::Variance: return run_variance(cfg);
  }
  config_error("unknown experiment kind");
}

}  // namespace ganlab
