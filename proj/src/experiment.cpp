#include "spheresteer/experiment.hpp"

#include "spheresteer/error.hpp"
#include "spheresteer/number_format.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>
#include <thread>

namespace spheresteer {

MeanStd mean_std(const std::vector<double>& values) {
  if (values.empty()) return {};
  // Work with offsets from the first sample so that a constant sequence yields
  // exactly that constant and a spread of exactly zero.
  const double shift = values.front();
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v - shift;
  const double offset = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - shift - offset) * (v - shift - offset);
  return {shift + offset, std::sqrt(sq / n)};
}

void require_same_lineage(const SteerableModel& steerable, const MLGPParams& ancestor) {
  const SteerableModel rebuilt = build_steerable(ancestor);
  if (!(rebuilt.banks() == steerable.banks()) || rebuilt.units() != steerable.units() ||
      !(rebuilt.with_coeffs(steerable.coeffs()) == steerable)) {
    throw Error(ErrorCode::InvalidArgument,
                "steerable checkpoint was not built from the given ancestor checkpoint");
  }
}

namespace {

Rng derived_rng(std::uint64_t seed, std::initializer_list<std::uint32_t> path) {
  std::vector<std::uint32_t> words = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  words.insert(words.end(), path.begin(), path.end());
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

double l1(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().sum(); }

}  // namespace

ExperimentReport known_rotation(const SteerableModel& steerable, const MLGPParams& ancestor,
                                const Dataset& data, const KnownRotationConfig& config) {
  data.validate();
  ancestor.validate();
  if (config.runs < 1) throw Error(ErrorCode::InvalidArgument, "runs must be at least 1");
  if (config.noise_levels.empty()) throw Error(ErrorCode::InvalidArgument, "no noise levels given");
  for (double a : config.noise_levels) {
    if (!(a >= 0.0)) throw Error(ErrorCode::NegativeAmplitude, "noise levels must be non-negative");
  }
  if (data.points_per_shape != ancestor.points_per_shape()) {
    throw Error(ErrorCode::ShapeMismatch, "dataset K does not match the model");
  }
  if (data.classes() != ancestor.classes()) {
    throw Error(ErrorCode::ShapeMismatch, "dataset class count does not match the model");
  }
  require_same_lineage(steerable, ancestor);

  std::vector<Eigen::VectorXd> truth;
  truth.reserve(data.clouds.size());
  for (const auto& c : data.clouds) truth.push_back(mlgp_forward(ancestor, c.points).hidden_pre);

  const std::size_t levels = config.noise_levels.size();
  const auto runs = static_cast<std::size_t>(config.runs);
  ExperimentReport report;
  report.runs.assign(levels, std::vector<RunOutcome>(runs));

  const auto do_run = [&](std::size_t run) {
    Rng rot_rng = derived_rng(config.seed, {static_cast<std::uint32_t>(run)});
    const Rotation3 r = sample_rotation(rot_rng);
    const Rotation3 rt = r.transpose();
    const SteerableModel steered = set_rotation(steerable, r);
    for (std::size_t l = 0; l < levels; ++l) {
      Rng noise_rng = derived_rng(config.seed, {static_cast<std::uint32_t>(run), static_cast<std::uint32_t>(l + 1)});
      RunOutcome out;
      std::size_t steer_correct = 0;
      std::size_t anc_correct = 0;
      for (std::size_t i = 0; i < data.clouds.size(); ++i) {
        const LabeledCloud& c = data.clouds[i];
        const PointCloud rotated = add_uniform_noise(rotate_cloud(r, c.points), config.noise_levels[l], noise_rng);
        const PointCloud derotated = rotate_cloud(rt, rotated);
        const ForwardTrace ts = steerable_forward(steered, rotated);
        const ForwardTrace ta = mlgp_forward(ancestor, derotated);
        const std::size_t ps = argmax(ts.logits);
        const std::size_t pa = argmax(ta.logits);
        steer_correct += ps == c.label;
        anc_correct += pa == c.label;
        out.prediction_mismatches += ps != pa;
        out.steerable_l1 += l1(ts.hidden_pre, truth[i]);
        out.ancestor_l1 += l1(ta.hidden_pre, truth[i]);
      }
      const double n = static_cast<double>(data.clouds.size());
      out.steerable_accuracy = 100.0 * static_cast<double>(steer_correct) / n;
      out.ancestor_accuracy = 100.0 * static_cast<double>(anc_correct) / n;
      out.steerable_l1 /= n;
      out.ancestor_l1 /= n;
      report.runs[l][run] = out;
    }
  };

  unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, runs));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t run = next++; run < runs && !failed; run = next++) {
          try {
            do_run(run);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);

  // Aggregation walks runs in index order, so results are thread-count independent.
  for (std::size_t l = 0; l < levels; ++l) {
    std::vector<double> sa, aa, sl, al;
    NoiseLevelRow row;
    row.noise = config.noise_levels[l];
    row.runs = config.runs;
    row.seed = config.seed;
    for (const RunOutcome& o : report.runs[l]) {
      sa.push_back(o.steerable_accuracy);
      aa.push_back(o.ancestor_accuracy);
      sl.push_back(o.steerable_l1);
      al.push_back(o.ancestor_l1);
      row.mismatched_runs += o.prediction_mismatches > 0;
    }
    row.steerable_accuracy = mean_std(sa);
    row.ancestor_accuracy = mean_std(aa);
    row.steerable_l1 = mean_std(sl);
    row.ancestor_l1 = mean_std(al);
    report.rows.push_back(row);
  }
  return report;
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  out << kReportCsvHeader << '\n';
  const auto f = [](double v) { return format_shortest(v); };
  for (const auto& r : rows) {
    out << f(r.noise) << ',' << r.runs << ',' << r.seed << ',' << f(r.steerable_accuracy.mean) << ','
        << f(r.steerable_accuracy.std) << ',' << f(r.ancestor_accuracy.mean) << ',' << f(r.ancestor_accuracy.std)
        << ',' << f(r.steerable_l1.mean) << ',' << f(r.steerable_l1.std) << ',' << f(r.ancestor_l1.mean) << ','
        << f(r.ancestor_l1.std) << ',' << r.mismatched_runs << '\n';
  }
  return out.str();
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j;
  j["columns"] = nlohmann::json::array();
  std::istringstream header(kReportCsvHeader);
  for (std::string col; std::getline(header, col, ',');) j["columns"].push_back(col);
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"noise", r.noise},
                         {"runs", r.runs},
                         {"seed", r.seed},
                         {"steerable_acc_mean", r.steerable_accuracy.mean},
                         {"steerable_acc_std", r.steerable_accuracy.std},
                         {"ancestor_acc_mean", r.ancestor_accuracy.mean},
                         {"ancestor_acc_std", r.ancestor_accuracy.std},
                         {"steerable_l1_mean", r.steerable_l1.mean},
                         {"steerable_l1_std", r.steerable_l1.std},
                         {"ancestor_l1_mean", r.ancestor_l1.mean},
                         {"ancestor_l1_std", r.ancestor_l1.std},
                         {"mismatched_runs", r.mismatched_runs}});
  }
  return j;
}

std::string ExperimentReport::to_table() const {
  std::ostringstream out;
  out << "  noise   steerable acc [%]   ancestor acc [%]   steerable L1        ancestor L1\n";
  for (const auto& r : rows) {
    out << std::fixed << std::setprecision(3) << std::setw(7) << r.noise << "   " << std::setprecision(1)
        << std::setw(6) << r.steerable_accuracy.mean << " ± " << std::setw(4) << r.steerable_accuracy.std
        << "      " << std::setw(6) << r.ancestor_accuracy.mean << " ± " << std::setw(4) << r.ancestor_accuracy.std
        << "     " << std::setprecision(2) << std::setw(6) << r.steerable_l1.mean << " ± " << std::setw(5)
        << r.steerable_l1.std << "    " << std::setw(6) << r.ancestor_l1.mean << " ± " << std::setw(5)
        << r.ancestor_l1.std << '\n';
  }
  return out.str();
}

}  // namespace spheresteer
