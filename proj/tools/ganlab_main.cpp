// ganlab <depth-sweep|consistency|clt|fit|theta-star|variance> [options]
// Exit codes: 0 success, 2 config error, 3 numerical failure.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ganlab/error.hpp"
#include "ganlab/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

bool config_like(ganlab::ErrorCode c) {
  using ganlab::ErrorCode;
  return c == ErrorCode::ConfigError || c == ErrorCode::InvalidParams || c == ErrorCode::UnknownModel;
}

std::vector<std::size_t> parse_list(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != item.size()) throw ganlab::Error(ganlab::ErrorCode::ConfigError, "bad --n list '" + s + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial estimation workbench: figure data for one-dimensional GANs"};
  std::string kind_name, config_path, model, n_list, scale_name, out_dir;
  std::optional<std::size_t> reps, workers;
  std::optional<std::uint64_t> seed;
  app.add_option("experiment", kind_name, "depth-sweep | consistency | clt | fit | theta-star | variance")
      ->required();
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--model", model, "model name (overrides the config's models)");
  app.add_option("--n", n_list, "comma-separated sample sizes");
  app.add_option("--reps", reps, "repetitions");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--scale", scale_name, "desk | paper");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", workers, "worker threads (0: all cores)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const auto kind = ganlab::parse_experiment_kind(kind_name);
    std::optional<ganlab::Scale> scale;
    if (!scale_name.empty()) scale = ganlab::parse_scale(scale_name);
    ganlab::ExperimentConfig cfg;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ganlab::Error(ganlab::ErrorCode::ConfigError, "cannot read " + config_path);
      std::stringstream text;
      text << in.rdbuf();
      cfg = ganlab::ExperimentConfig::from_json(text.str(), kind, scale);
    } else {
      cfg = ganlab::ExperimentConfig::defaults(kind, scale.value_or(ganlab::Scale::Desk));
    }
    if (!model.empty()) cfg.models = {model};
    if (!n_list.empty()) cfg.sample_sizes = parse_list(n_list);
    if (reps) cfg.repetitions = *reps;
    if (seed) cfg.base_seed = *seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (workers) cfg.workers = *workers;
    cfg.validate();

    const auto out = ganlab::run_experiment(cfg);
    for (const auto& f : out.files) std::cout << f.string() << '\n';
    std::size_t failed = 0;
    for (const auto& r : out.records) failed += r.failed;
    if (failed) std::cerr << failed << " of " << out.records.size() << " runs failed (flagged in the output)\n";
    return 0;
  } catch (const ganlab::Error& e) {
    std::cerr << "ganlab: " << e.what() << '\n';
    return config_like(e.code()) ? kExitConfig : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "ganlab: " << e.what() << '\n';
    return kExitNumerical;
  }
}
