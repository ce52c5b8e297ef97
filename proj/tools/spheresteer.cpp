// Command-line front end: train an ancestor MLGP, turn it into a steerable
// model, evaluate either one, run the known-rotation experiment and the
// property suite.

#include "spheresteer/checkpoint.hpp"
#include "spheresteer/config.hpp"
#include "spheresteer/error.hpp"
#include "spheresteer/experiment.hpp"
#include "spheresteer/number_format.hpp"
#include "spheresteer/steer.hpp"
#include "spheresteer/train.hpp"
#include "spheresteer/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace ss = spheresteer;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw ss::Error(ss::ErrorCode::InvalidArgument, "cannot write " + path.string());
}

std::string percent(double fraction) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << 100.0 * fraction;
  return s.str();
}

// Dataset for eval and known-rotation: an explicit file wins over the config.
ss::Dataset resolve_dataset(const std::string& dataset, const std::string& config, const std::string& part) {
  if (!dataset.empty()) return ss::load_dataset(dataset);
  if (config.empty()) throw ss::Error(ss::ErrorCode::ParseError, "either --dataset or --config is required");
  const ss::PreparedData data = ss::prepare_data(ss::load_run_config(config));
  return ss::select_part(data, part);
}

struct TrainArgs {
  std::string config;
  std::string dataset;
  std::string out;
  std::string loss_csv;
  std::optional<std::uint64_t> seed;
  int log_every = 100;
};

int cmd_train(const TrainArgs& a) {
  ss::RunConfig cfg = ss::load_run_config(a.config);
  if (!a.dataset.empty()) cfg.dataset = a.dataset;
  if (a.seed) cfg.train.seed = *a.seed;
  const ss::PreparedData data = ss::prepare_data(cfg);

  std::cout << "training H=" << cfg.train.hidden_units << " on " << data.split.train.clouds.size()
            << " clouds, " << cfg.train.epochs << " epochs, seed " << cfg.train.seed << '\n';
  const auto progress = [&](const ss::EpochStats& s) {
    if (a.log_every > 0 && (s.epoch - 1) % a.log_every == 0) {
      std::cout << "epoch " << s.epoch - 1 << " loss " << ss::format_shortest(s.loss) << " accuracy "
                << percent(s.accuracy) << "%\n";
    }
  };
  const ss::TrainResult result = ss::train(data.split.train, cfg.train, progress);
  std::cout << "epoch " << cfg.train.epochs << " loss " << ss::format_shortest(result.final_loss) << " accuracy "
            << percent(result.final_accuracy) << "%\n";
  if (result.first_perfect_epoch) std::cout << "first 100% after " << *result.first_perfect_epoch << " updates\n";
  for (const char* part : {"validation", "test"}) {
    const ss::Dataset& d = ss::select_part(data, part);
    if (!d.clouds.empty()) std::cout << part << " accuracy " << percent(ss::accuracy(result.params, d)) << "%\n";
  }

  ss::Checkpoint ckpt;
  ckpt.model = result.params;
  ckpt.class_names = data.all.class_names;
  ckpt.seed = cfg.train.seed;
  ckpt.config = cfg.to_json();
  ss::save_checkpoint(ckpt, a.out);

  const std::string loss_path = a.loss_csv.empty() ? a.out + ".loss.csv" : a.loss_csv;
  std::ostringstream csv;
  csv << "updates,loss,accuracy\n";
  for (const auto& s : result.history) {
    csv << s.epoch - 1 << ',' << ss::format_shortest(s.loss) << ',' << ss::format_shortest(s.accuracy) << '\n';
  }
  csv << cfg.train.epochs << ',' << ss::format_shortest(result.final_loss) << ','
      << ss::format_shortest(result.final_accuracy) << '\n';
  write_text(loss_path, csv.str());
  std::cout << "wrote " << a.out << " and " << loss_path << '\n';
  return 0;
}

int cmd_build_steerable(const std::string& checkpoint, const std::string& out) {
  ss::Checkpoint ckpt = ss::load_checkpoint(checkpoint);
  const ss::SteerableModel model = ss::build_steerable(ckpt.ancestor());
  std::cout << "built " << model.hidden_units() * model.points_per_shape() << " filter banks (H="
            << model.hidden_units() << ", K=" << model.points_per_shape() << ")\n";
  ckpt.model = model;
  ss::save_checkpoint(ckpt, out);
  std::cout << "wrote " << out << '\n';
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string dataset;
  std::string config;
  std::string part = "all";
  std::string out;
  std::uint64_t seed = 0;
  bool rotate = false;
};

int cmd_eval(const EvalArgs& a) {
  const ss::Checkpoint ckpt = ss::load_checkpoint(a.checkpoint);
  ss::Dataset data = resolve_dataset(a.dataset, a.config, a.part);
  data.validate();
  if (data.clouds.empty()) throw ss::Error(ss::ErrorCode::InvalidArgument, "dataset part is empty");

  ss::Rotation3 r;
  if (a.rotate) {
    ss::Rng rng(a.seed);
    r = ss::sample_rotation(rng);
    if (ckpt.kind() == ss::ModelKind::Ancestor) {
      std::cout << "note: the ancestor is not rotation invariant; evaluating it on rotated clouds\n";
    }
  }
  const std::optional<ss::SteerableModel> steered =
      ckpt.kind() == ss::ModelKind::Steerable ? std::optional(ss::set_rotation(ckpt.steerable(), r))
                                              : std::nullopt;
  std::size_t correct = 0;
  double loss = 0.0;
  for (const auto& c : data.clouds) {
    const ss::PointCloud pts = a.rotate ? ss::rotate_cloud(r, c.points) : c.points;
    const ss::ForwardTrace t = steered ? ss::steerable_forward(*steered, pts) : ss::mlgp_forward(ckpt.ancestor(), pts);
    correct += ss::argmax(t.logits) == c.label;
    loss += ss::cross_entropy_loss(t.logits, c.label);
  }
  const double n = static_cast<double>(data.clouds.size());
  std::cout << to_string(ckpt.kind()) << " model on " << data.clouds.size() << " clouds"
            << (a.rotate ? " (rotated, seed " + std::to_string(a.seed) + ")" : std::string()) << ": accuracy "
            << percent(correct / n) << "%, mean loss " << ss::format_shortest(loss / n) << '\n';
  if (!a.out.empty()) {
    const nlohmann::json j = {{"kind", to_string(ckpt.kind())}, {"clouds", data.clouds.size()},
                              {"correct", correct},        {"accuracy", correct / n},
                              {"mean_loss", loss / n},     {"rotated", a.rotate},
                              {"seed", a.seed}};
    write_text(a.out, j.dump(1) + "\n");
  }
  return 0;
}

struct KnownRotationArgs {
  std::string checkpoint;
  std::string ancestor;
  std::string dataset;
  std::string config;
  std::string part = "all";
  std::string out;
  std::vector<double> noise;
  int runs = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

int cmd_known_rotation(const KnownRotationArgs& a) {
  const ss::Checkpoint steer = ss::load_checkpoint(a.checkpoint);
  const ss::Checkpoint anc = ss::load_checkpoint(a.ancestor);
  const ss::Dataset data = resolve_dataset(a.dataset, a.config, a.part);
  ss::KnownRotationConfig cfg;
  if (!a.noise.empty()) cfg.noise_levels = a.noise;
  cfg.runs = a.runs;
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  const ss::ExperimentReport report = ss::known_rotation(steer.steerable(), anc.ancestor(), data, cfg);
  std::cout << report.to_table();
  if (!a.out.empty()) {
    write_text(a.out + ".csv", report.to_csv());
    write_text(a.out + ".json", report.to_json().dump(1) + "\n");
    std::cout << "wrote " << a.out << ".csv and " << a.out << ".json\n";
  }
  return 0;
}

int cmd_verify(std::uint64_t seed, int trials, const std::string& out) {
  ss::VerifyOptions opts;
  opts.seed = seed;
  opts.trials = trials;
  const ss::VerifyReport report = ss::run_property_suite(opts);
  std::cout << report.to_table();
  if (!out.empty()) write_text(out, report.to_json().dump(1) + "\n");
  const bool ok = report.all_passed();
  std::cout << (ok ? "all properties passed\n" : "property failures found\n");
  return ok ? 0 : kExitFailure;
}

int cmd_make_dataset(const std::string& kind, std::size_t per_class, std::uint64_t seed, const std::string& out) {
  const ss::Dataset data = kind == "tetris" ? ss::tetris_dataset() : ss::synthetic_skeleton_dataset(per_class, seed);
  ss::save_dataset(data, out);
  std::cout << "wrote " << data.clouds.size() << " clouds to " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical neurons and steerable filter banks for 3D point clouds"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train an ancestor MLGP in canonical orientation");
  train_cmd->add_option("--config", train.config, "Run configuration (JSON)")->required();
  train_cmd->add_option("--dataset", train.dataset, "Override the configured dataset file");
  train_cmd->add_option("--seed", train.seed, "Override the configured initialization seed");
  train_cmd->add_option("--out", train.out, "Checkpoint to write")->required();
  train_cmd->add_option("--loss-csv", train.loss_csv, "Loss history CSV (default: <out>.loss.csv)");
  train_cmd->add_option("--log-every", train.log_every, "Progress line interval in epochs (0 = quiet)");

  std::string build_in, build_out;
  auto* build_cmd = app.add_subcommand("build-steerable", "Freeze an ancestor and build its filter banks");
  build_cmd->add_option("--checkpoint", build_in, "Ancestor checkpoint")->required();
  build_cmd->add_option("--out", build_out, "Steerable checkpoint to write")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy and loss of a checkpoint on a dataset");
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Ancestor or steerable checkpoint")->required();
  eval_cmd->add_option("--dataset", eval.dataset, "Dataset file (used as is)");
  eval_cmd->add_option("--config", eval.config, "Run configuration providing the dataset");
  eval_cmd->add_option("--part", eval.part, "all, train, validation or test (with --config)");
  eval_cmd->add_flag("--rotate", eval.rotate, "Rotate every cloud by a rotation drawn from --seed and steer");
  eval_cmd->add_option("--seed", eval.seed, "Seed for --rotate");
  eval_cmd->add_option("--out", eval.out, "Write the result as JSON");

  KnownRotationArgs kr;
  auto* kr_cmd = app.add_subcommand("known-rotation", "Known-rotation experiment with paired noise");
  kr_cmd->add_option("--checkpoint", kr.checkpoint, "Steerable checkpoint")->required();
  kr_cmd->add_option("--ancestor", kr.ancestor, "Ancestor checkpoint the steerable one was built from")->required();
  kr_cmd->add_option("--dataset", kr.dataset, "Canonical dataset file (used as is)");
  kr_cmd->add_option("--config", kr.config, "Run configuration providing the dataset");
  kr_cmd->add_option("--part", kr.part, "all, train, validation or test (with --config)");
  kr_cmd->add_option("--noise", kr.noise, "Noise amplitude; repeat for several levels");
  kr_cmd->add_option("--runs", kr.runs, "Runs per noise level");
  kr_cmd->add_option("--seed", kr.seed, "Experiment seed");
  kr_cmd->add_option("--threads", kr.threads, "Worker threads (0 = all cores); results do not depend on it");
  kr_cmd->add_option("--out", kr.out, "Report prefix; writes <out>.csv and <out>.json");

  std::uint64_t verify_seed = 0;
  int verify_trials = 100;
  std::string verify_out;
  auto* verify_cmd = app.add_subcommand("verify", "Randomized equivariance and steerability properties");
  verify_cmd->add_option("--seed", verify_seed, "Suite seed");
  verify_cmd->add_option("--trials", verify_trials, "Trials per property")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--out", verify_out, "Write the report as JSON");

  std::string make_kind = "tetris", make_out;
  std::size_t make_per_class = 20;
  std::uint64_t make_seed = 0;
  auto* make_cmd = app.add_subcommand("make-dataset", "Write a built-in dataset to a file");
  make_cmd->add_option("--kind", make_kind, "tetris or skeleton")->check(CLI::IsMember({"tetris", "skeleton"}));
  make_cmd->add_option("--per-class", make_per_class, "Samples per class (skeleton)");
  make_cmd->add_option("--seed", make_seed, "Generator seed (skeleton)");
  make_cmd->add_option("--out", make_out, "Dataset file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train);
    if (*build_cmd) return cmd_build_steerable(build_in, build_out);
    if (*eval_cmd) return cmd_eval(eval);
    if (*kr_cmd) return cmd_known_rotation(kr);
    if (*verify_cmd) return cmd_verify(verify_seed, verify_trials, verify_out);
    if (*make_cmd) return cmd_make_dataset(make_kind, make_per_class, make_seed, make_out);
  } catch (const ss::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    const bool usage = e.code() == ss::ErrorCode::ParseError || e.code() == ss::ErrorCode::SchemaMismatch;
    return usage ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}
