#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "histoboost/bench.hpp"
#include "histoboost/binning.hpp"
#include "histoboost/boosting.hpp"
#include "histoboost/io.hpp"
#include "histoboost/metrics.hpp"

namespace {

using histoboost::Schedule;

struct TrainArgs {
  std::string data;
  std::string format = "auto";
  std::string label = "label";
  bool no_header = false;
  std::string loss = "squared";
  histoboost::BoosterParams params;
  std::string precision = "single";
  std::string backend = "partitioned";
  std::string out;
};

int run_train(const TrainArgs& args) {
  histoboost::RawDataset raw =
      histoboost::load_dataset(args.data, args.format, args.label, !args.no_header);
  if (raw.num_rows() == 0) throw std::runtime_error("no rows in " + args.data);

  histoboost::BoosterParams params = args.params;
  params.precision = args.precision == "double" ? histoboost::PrecisionMode::bits64
                                                : histoboost::PrecisionMode::bits32;
  params.backend = args.backend == "lockstep" ? histoboost::HistogramBackend::lockstep
                                              : histoboost::HistogramBackend::partitioned;

  auto t0 = std::chrono::steady_clock::now();
  histoboost::BinnedDataset data = histoboost::bin_dataset(
      raw, params.max_bin, params.sparse_threshold, params.seed);
  if (params.backend == histoboost::HistogramBackend::lockstep) {
    histoboost::prepare_packed(data);
  }
  histoboost::Model model = histoboost::train_model(
      data, raw.targets, histoboost::loss_from_name(args.loss), params);
  auto t1 = std::chrono::steady_clock::now();

  histoboost::save_model(model, args.out);
  std::cout << "trained " << model.trees.size() << " trees on " << raw.num_rows() << " rows x "
            << raw.num_features() << " features in "
            << std::chrono::duration<double>(t1 - t0).count() << " s, model written to "
            << args.out << "\n";
  return 0;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& format, const std::string& label, bool no_header,
                const std::string& out) {
  histoboost::Model model = histoboost::load_model(model_path);
  histoboost::RawDataset raw;
  if (label.empty()) {
    // No label column to strip: parse as all-features CSV by synthesizing
    // an index-less load through libsvm or csv with a fake first column is
    // not possible, so require labels for csv; libsvm always carries one.
    raw = histoboost::load_dataset(data_path, format, "0", !no_header);
  } else {
    raw = histoboost::load_dataset(data_path, format, label, !no_header);
  }
  histoboost::save_predictions(model.predict(raw), out);
  std::cout << "wrote " << raw.num_rows() << " predictions to " << out << "\n";
  return 0;
}

int run_eval(const std::string& preds_path, const std::string& labels_path,
             const std::string& metric) {
  std::vector<double> preds = histoboost::load_value_lines(preds_path);
  std::vector<double> labels;
  // Accept either one label per line or a LibSVM file.
  try {
    labels = histoboost::load_value_lines(labels_path);
  } catch (const std::exception&) {
    labels = histoboost::load_libsvm(labels_path).targets;
  }
  if (preds.size() != labels.size()) {
    throw std::runtime_error("prediction/label count mismatch: " +
                             std::to_string(preds.size()) + " vs " +
                             std::to_string(labels.size()));
  }
  double value = metric == "auc" ? histoboost::auc(preds, labels)
                                 : histoboost::rmse(preds, labels);
  if (std::isnan(value)) throw std::runtime_error("metric undefined on this input");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  std::cout << metric << " " << std::string(buf, res.ptr) << "\n";
  return 0;
}

int run_inspect(const std::string& model_path) {
  histoboost::Model model = histoboost::load_model(model_path);
  std::cout << "loss " << (model.loss == histoboost::LossKind::squared ? "squared" : "logistic")
            << "\nlearning_rate " << model.learning_rate << "\ninitial_score "
            << model.initial_score << "\nnum_trees " << model.trees.size() << "\n";
  std::map<int, std::int64_t> feature_uses;
  std::int64_t total_leaves = 0;
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    int leaves = model.trees[t].num_leaves();
    total_leaves += leaves;
    std::cout << "tree " << t << " leaves " << leaves << "\n";
    for (const auto& node : model.trees[t].nodes()) {
      if (!node.is_leaf()) ++feature_uses[node.feature];
    }
  }
  std::cout << "total_leaves " << total_leaves << "\n";
  for (auto [feature, uses] : feature_uses) {
    std::cout << "feature " << feature << " splits " << uses << "\n";
  }
  return 0;
}

int run_bench(histoboost::BenchParams params, const std::string& kernels,
              const std::string& fast_path) {
  params.kernels.clear();
  std::size_t start = 0;
  std::string token;
  for (std::size_t i = 0; i <= kernels.size(); ++i) {
    if (i == kernels.size() || kernels[i] == ',') {
      token = kernels.substr(start, i - start);
      start = i + 1;
      if (token.empty()) continue;
      if (token == "rotated") {
        params.kernels.push_back(Schedule::rotated);
      } else if (token == "naive") {
        params.kernels.push_back(Schedule::naive);
      } else {
        throw std::runtime_error("unknown kernel: " + token);
      }
    }
  }
  params.fast_path = fast_path == "on";

  if (histoboost::estimate_occupancy(params.max_bin, params.banks,
                                     histoboost::WorkgroupConfig{}.local_mem_capacity) < 1) {
    std::cerr << "skipping: bin_count " << params.max_bin << " x banks " << params.banks
              << " leaves room for zero workgroups\n";
    return 0;
  }

  auto rows = histoboost::run_bandwidth_benchmark(params);
  for (const auto& row : rows) {
    nlohmann::ordered_json j;
    j["kernel"] = row.kernel;
    j["D"] = row.depth;
    j["elapsed_s"] = row.elapsed_s;
    j["bandwidth_Bps"] = row.bandwidth_bps;
    j["atomic_updates"] = row.report.total_atomic_updates;
    j["serialization_steps"] = row.report.total_serialization_steps;
    j["conflict_ratio"] = row.report.conflict_ratio();
    std::cout << j.dump() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"histogram-based gradient boosting with a lock-step histogram kernel"};
  app.require_subcommand(1);

  TrainArgs train;
  std::string depths = "0,1,2,3,4,5,6,7,8";
  std::string kernels = "rotated,naive";
  std::string fast_path = "off";
  histoboost::BenchParams bench;

  auto* train_cmd = app.add_subcommand("train", "fit a boosted tree model");
  train_cmd->add_option("--data", train.data, "training file (csv or libsvm)")->required();
  train_cmd->add_option("--format", train.format, "data format: auto|csv|libsvm");
  train_cmd->add_option("--label", train.label, "label column name or index (csv)");
  train_cmd->add_flag("--no-header", train.no_header, "csv file has no header row");
  train_cmd->add_option("--loss", train.loss, "squared|logistic");
  train_cmd->add_option("--num-iterations", train.params.num_iterations, "boosting rounds");
  train_cmd->add_option("--learning-rate", train.params.learning_rate, "shrinkage");
  train_cmd->add_option("--num-leaves", train.params.num_leaves, "leaves per tree");
  train_cmd->add_option("--max-bin", train.params.max_bin, "bin capacity: 16|64|256")
      ->check(CLI::IsMember({16, 64, 256}));
  train_cmd->add_option("--min-data-in-leaf", train.params.min_data_in_leaf,
                        "minimum rows per leaf");
  train_cmd->add_option("--lambda", train.params.lambda, "leaf value regularizer");
  train_cmd->add_option("--sparse-threshold", train.params.sparse_threshold,
                        "sentinel-bin fraction above which a feature is sparse (1 = never)");
  train_cmd->add_option("--precision", train.precision, "histogram accumulation: single|double")
      ->check(CLI::IsMember({"single", "double"}));
  train_cmd->add_option("--backend", train.backend,
                        "histogram builder: partitioned|lockstep")
      ->check(CLI::IsMember({"partitioned", "lockstep"}));
  train_cmd->add_option("--seed", train.params.seed, "sampling seed");
  train_cmd->add_option("--out", train.out, "model output path")->required();

  std::string predict_model, predict_data, predict_out;
  std::string predict_format = "auto", predict_label = "label";
  bool predict_no_header = false;
  auto* predict_cmd = app.add_subcommand("predict", "score rows with a saved model");
  predict_cmd->add_option("--model", predict_model, "model file")->required();
  predict_cmd->add_option("--data", predict_data, "rows to score")->required();
  predict_cmd->add_option("--format", predict_format, "data format: auto|csv|libsvm");
  predict_cmd->add_option("--label", predict_label,
                          "label column to skip (csv; ignored for scoring)");
  predict_cmd->add_flag("--no-header", predict_no_header, "csv file has no header row");
  predict_cmd->add_option("--out", predict_out, "predictions output path")->required();

  std::string eval_preds, eval_labels, eval_metric = "auc";
  auto* eval_cmd = app.add_subcommand("eval", "score predictions against labels");
  eval_cmd->add_option("--preds", eval_preds, "predictions, one per line")->required();
  eval_cmd->add_option("--labels", eval_labels, "labels: one per line, or a libsvm file")
      ->required();
  eval_cmd->add_option("--metric", eval_metric, "auc|rmse")
      ->check(CLI::IsMember({"auc", "rmse"}));

  std::string inspect_model;
  auto* inspect_cmd = app.add_subcommand("inspect", "summarize a saved model");
  inspect_cmd->add_option("--model", inspect_model, "model file")->required();

  auto* bench_cmd = app.add_subcommand("bench", "histogram kernel bandwidth benchmark");
  bench_cmd->add_option("--n", bench.rows, "row count");
  bench_cmd->add_option("--d", bench.features, "feature count");
  bench_cmd->add_option("--max-bin", bench.max_bin, "bin capacity: 16|64|256")
      ->check(CLI::IsMember({16, 64, 256}));
  bench_cmd->add_option("--depths", depths, "comma-separated leaf depths");
  bench_cmd->add_option("--kernels", kernels, "comma-separated: rotated,naive");
  bench_cmd->add_option("--workgroup-size", bench.workgroup_size, "threads per workgroup");
  bench_cmd->add_option("--banks", bench.banks, "histogram banks per counter");
  bench_cmd->add_option("--fast-path", fast_path, "most-recently-used bin registers: on|off")
      ->check(CLI::IsMember({"on", "off"}));
  bench_cmd->add_option("--reps", bench.repetitions, "repetitions, best one is reported");
  bench_cmd->add_option("--seed", bench.seed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return run_train(train);
    if (predict_cmd->parsed()) {
      return run_predict(predict_model, predict_data, predict_format, predict_label,
                         predict_no_header, predict_out);
    }
    if (eval_cmd->parsed()) return run_eval(eval_preds, eval_labels, eval_metric);
    if (inspect_cmd->parsed()) return run_inspect(inspect_model);
    if (bench_cmd->parsed()) {
      bench.depths.clear();
      std::size_t start = 0;
      for (std::size_t i = 0; i <= depths.size(); ++i) {
        if (i == depths.size() || depths[i] == ',') {
          std::string token = depths.substr(start, i - start);
          start = i + 1;
          if (!token.empty()) bench.depths.push_back(std::stoi(token));
        }
      }
      return run_bench(bench, kernels, fast_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
