// pwu: train, unlearn, retrain, evaluate and summarize patched models.
#include "pwu/data.hpp"
#include "pwu/errors.hpp"
#include "pwu/evaluation.hpp"
#include "pwu/model_io.hpp"
#include "pwu/train.hpp"
#include "pwu/unlearning.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNotConverged = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return "";
  }
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

/// Records flags, seeds and file hashes next to the primary output.
class Manifest {
public:
  Manifest(std::string command, const CLI::App& sub) : command_(std::move(command)) {
    for (const CLI::Option* opt : sub.get_options()) {
      if (opt->get_single_name() == "help" || opt->count() == 0) {
        continue;
      }
      const auto results = opt->results();
      flags_[opt->get_single_name()] = results.size() == 1 ? json(results.front()) : json(results);
    }
  }
  void input(const fs::path& p) { inputs_.push_back(p); }
  void output(const fs::path& p) { outputs_.push_back(p); }
  void seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }

  void write(const fs::path& path) const {
    json j;
    j["tool"] = "pwu";
    j["command"] = command_;
    j["flags"] = flags_;
    j["seeds"] = seeds_;
    auto hashes = [](const std::vector<fs::path>& files) {
      json out = json::object();
      for (const auto& f : files) {
        if (fs::is_regular_file(f)) {
          out[f.string()] = sha256_file(f);
        } else if (fs::is_directory(f)) {
          for (const auto& e : fs::directory_iterator(f)) {
            if (e.is_regular_file()) {
              out[e.path().string()] = sha256_file(e.path());
            }
          }
        }
      }
      return out;
    };
    j["inputs"] = hashes(inputs_);
    j["outputs"] = hashes(outputs_);
    std::ofstream(path) << j.dump(2) << "\n";
  }

private:
  std::string command_;
  json flags_ = json::object();
  json seeds_ = json::object();
  std::vector<fs::path> inputs_;
  std::vector<fs::path> outputs_;
};

/// Files a data spec reads, for hashing.
std::vector<fs::path> data_files(const std::string& spec) {
  std::vector<fs::path> files;
  for (const char* key : {"dir=", "train=", "test="}) {
    const auto pos = spec.find(key);
    if (pos != std::string::npos) {
      const auto start = pos + std::string(key).size();
      files.emplace_back(spec.substr(start, spec.find(',', start) - start));
    }
  }
  return files;
}

std::vector<int> parse_widths(const std::string& arch) {
  std::vector<int> widths;
  std::stringstream ss(arch);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      widths.push_back(std::stoi(item, &used));
      if (used != item.size() || widths.back() < 1) {
        throw std::invalid_argument(item);
      }
    } catch (const std::logic_error&) {
      throw UsageError("--arch expects comma-separated positive widths, got '" + arch + "'");
    }
  }
  return widths;
}

std::vector<int> read_ids(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw pwu::ParseError("cannot open id file " + path.string());
  }
  std::vector<int> ids;
  std::string tok;
  int line = 0;
  while (in >> tok) {
    ++line;
    std::stringstream ss(tok);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) {
        continue;
      }
      try {
        ids.push_back(std::stoi(item));
      } catch (const std::logic_error&) {
        throw pwu::ParseError("id file " + path.string() + ": bad id '" + item + "' in token " +
                              std::to_string(line));
      }
    }
  }
  return ids;
}

void write_ids(const fs::path& path, const std::vector<int>& ids) {
  std::ofstream out(path);
  for (int id : ids) {
    out << id << "\n";
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw pwu::ParseError("cannot write " + path.string());
  }
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw pwu::ParseError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

pwu::Mat features_of(const pwu::PatchedModel& model, const pwu::Dataset& d) {
  return model.features(d.x);
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string arch = "16,16";
  int epochs = 50;
  double lr = 0.05;
  int batch = 32;
  std::uint64_t seed = 1;
  std::string out;
};

pwu::PatchedModel train_from(const pwu::DataBundle& bundle, const pwu::TrainOptions& opts,
                             json& meta) {
  pwu::FeatureMap fm = pwu::FeatureMap::identity(bundle.train.dim());
  fm.standardize = bundle.standardize;
  pwu::Mat z(bundle.train.dim(), bundle.train.size());
  for (Eigen::Index i = 0; i < z.cols(); ++i) {
    z.col(i) = fm.apply(bundle.train.x.col(i));
  }
  pwu::MlpNetwork net = pwu::train_mlp(z, bundle.train.y, bundle.train.num_classes, opts,
                                       [](int epoch, double loss) {
                                         spdlog::debug("epoch {} loss {:.6f}", epoch, loss);
                                       });
  pwu::PatchedModel model;
  model.base = std::move(net);
  model.featuremap = std::move(fm);
  model.domain = bundle.domain;
  model.validate();
  meta["data"] = bundle.spec;
  meta["arch"] = opts.widths;
  meta["epochs"] = opts.epochs;
  meta["lr"] = opts.lr;
  meta["batch"] = opts.batch;
  meta["momentum"] = opts.momentum;
  meta["seed"] = opts.seed;
  meta["train_size"] = bundle.train.size();
  meta["train_accuracy"] = pwu::accuracy(model, bundle.train);
  meta["test_accuracy"] = pwu::accuracy(model, bundle.test);
  return model;
}

int run_train(const TrainArgs& a, const CLI::App& sub) {
  Manifest manifest("train", sub);
  const pwu::DataBundle bundle = pwu::load_data(a.data);
  pwu::TrainOptions opts;
  opts.widths = parse_widths(a.arch);
  opts.epochs = a.epochs;
  opts.lr = a.lr;
  opts.batch = a.batch;
  opts.seed = a.seed;
  json meta;
  const pwu::PatchedModel model = train_from(bundle, opts, meta);
  spdlog::info("trained: train accuracy {:.2f}%, test accuracy {:.2f}%",
               meta["train_accuracy"].get<double>(), meta["test_accuracy"].get<double>());
  pwu::save_model(model, a.out, meta);
  for (const auto& f : data_files(a.data)) {
    manifest.input(f);
  }
  manifest.seed("train", a.seed);
  manifest.output(a.out);
  manifest.write(a.out + ".manifest.json");
  return kExitOk;
}

// ---- unlearn ---------------------------------------------------------------

struct UnlearnArgs {
  std::string model;
  std::string data;
  std::string mode = "multi";
  std::string select;
  int k = 1;
  double delta = 0.9;
  double lambda = 1e4;
  double lambda_max = 1e8;
  double eps = 1e-3;
  std::string confusion = "constant";
  std::uint64_t seed = 0;
  int max_iterations = 50;
  std::string out;
  std::string report;
};

int run_unlearn(const UnlearnArgs& a, const CLI::App& sub) {
  Manifest manifest("unlearn", sub);
  pwu::UnlearnRequest req;
  if (a.mode == "single") {
    req.mode = pwu::UnlearnMode::single;
  } else if (a.mode == "multi" || a.mode == "multipoint") {
    req.mode = pwu::UnlearnMode::multipoint;
  } else if (a.mode == "class") {
    req.mode = pwu::UnlearnMode::class_;
  } else {
    throw UsageError("--mode must be single, multi or class");
  }
  const auto colon = a.select.find(':');
  const std::string sel_kind = a.select.substr(0, colon);
  const std::string sel_arg = colon == std::string::npos ? "" : a.select.substr(colon + 1);
  if (req.mode == pwu::UnlearnMode::class_ && sel_kind != "class") {
    throw UsageError("--mode class requires --select class:C");
  }
  if (req.mode != pwu::UnlearnMode::class_ && sel_kind == "class") {
    throw UsageError("--select class:C is only valid with --mode class");
  }
  if (sel_kind != "random" && sel_kind != "ids" && sel_kind != "class") {
    throw UsageError("--select must be random:N, ids:FILE or class:C");
  }
  if (a.confusion != "constant" && a.confusion != "affine") {
    throw UsageError("--confusion must be constant or affine");
  }

  json training;
  const pwu::PatchedModel model = pwu::load_model(a.model, &training);
  const std::string spec = a.data.empty() ? training.value("data", "") : a.data;
  if (spec.empty()) {
    throw UsageError("--data is required when the model file carries no data spec");
  }
  const pwu::DataBundle bundle = pwu::load_data(spec);
  const auto n = static_cast<int>(bundle.train.size());

  std::vector<int> ids;
  if (sel_kind == "random") {
    int count = 0;
    try {
      count = std::stoi(sel_arg);
    } catch (const std::logic_error&) {
      throw UsageError("--select random:N needs an integer N");
    }
    if (count < 1 || count > n) {
      throw UsageError("--select random:N needs 1 <= N <= " + std::to_string(n));
    }
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    std::mt19937_64 rng(a.seed ^ 0x5e1ec7ULL);
    std::shuffle(all.begin(), all.end(), rng);
    ids.assign(all.begin(), all.begin() + count);
    std::sort(ids.begin(), ids.end());
  } else if (sel_kind == "ids") {
    ids = read_ids(sel_arg);
    manifest.input(sel_arg);
  } else {
    int c = 0;
    try {
      c = std::stoi(sel_arg);
    } catch (const std::logic_error&) {
      throw UsageError("--select class:C needs an integer class");
    }
    req.y_unlearn = c;
    for (int i = 0; i < n; ++i) {
      if (bundle.train.y[static_cast<std::size_t>(i)] == c) {
        ids.push_back(i);
      }
    }
    if (ids.empty()) {
      throw pwu::ValidationError("class " + std::to_string(c) + " has no training points");
    }
  }
  if (req.mode == pwu::UnlearnMode::single && ids.size() != 1) {
    throw UsageError("--mode single needs exactly one selected point");
  }

  const pwu::Dataset d_u = bundle.train.subset(ids);
  const pwu::Dataset d_r = bundle.train.without(ids);
  req.points = features_of(model, d_u);
  req.labels = d_u.y;
  req.guard = features_of(model, d_r);
  req.k = a.k;
  req.delta = a.delta;
  req.lambda.initial = a.lambda;
  req.lambda.max = std::max(a.lambda, a.lambda_max);
  req.epsilon = a.eps;
  req.confusion = a.confusion == "affine" ? pwu::ConfusionMode::affine : pwu::ConfusionMode::constant;
  req.seed = a.seed;
  req.max_iterations = a.max_iterations;

  const pwu::UnlearnResult res = pwu::unlearn(model, req);
  json meta = training;
  meta["unlearn"] = {{"mode", pwu::to_string(req.mode)}, {"selected", ids.size()},
                     {"seed", a.seed}, {"k", a.k}, {"delta", a.delta}};
  pwu::save_model(res.model, a.out, meta);
  write_text(a.report, pwu::report_to_text(res.report));
  write_text(a.report + ".timings.csv", pwu::timings_csv(res.report));
  write_ids(a.report + ".ids", ids);
  spdlog::info("{}: flip rate {:.4f} after {} iterations, {} patches, {} supports",
               pwu::to_string(res.report.status), res.report.flip_rate,
               res.report.iterations.size(), res.report.patch_count, res.report.support_count);

  manifest.input(a.model);
  for (const auto& f : data_files(spec)) {
    manifest.input(f);
  }
  manifest.seed("unlearn", a.seed);
  manifest.output(a.out);
  manifest.output(a.report);
  manifest.output(a.report + ".ids");
  manifest.write(a.out + ".manifest.json");
  return res.report.status == pwu::UnlearnStatus::not_converged ? kExitNotConverged : kExitOk;
}

// ---- retrain ---------------------------------------------------------------

struct RetrainArgs {
  std::string model_config;
  std::string drop;
  std::string data;
  std::string out;
};

int run_retrain(const RetrainArgs& a, const CLI::App& sub) {
  Manifest manifest("retrain", sub);
  json training;
  pwu::load_model(a.model_config, &training);
  if (!training.contains("arch") || !training.contains("epochs")) {
    throw pwu::ValidationError("model file carries no training configuration to repeat");
  }
  const std::string spec = a.data.empty() ? training.value("data", "") : a.data;
  pwu::DataBundle bundle = pwu::load_data(spec);
  if (a.drop.rfind("ids:", 0) != 0) {
    throw UsageError("--drop expects ids:FILE");
  }
  const std::string ids_path = a.drop.substr(4);
  const std::vector<int> ids = read_ids(ids_path);
  bundle.train = bundle.train.without(ids);
  pwu::TrainOptions opts;
  opts.widths = training["arch"].get<std::vector<int>>();
  opts.epochs = training["epochs"].get<int>();
  opts.lr = training["lr"].get<double>();
  opts.batch = training["batch"].get<int>();
  opts.momentum = training.value("momentum", 0.9);
  opts.seed = training["seed"].get<std::uint64_t>();
  const auto t0 = std::chrono::steady_clock::now();
  json meta;
  const pwu::PatchedModel model = train_from(bundle, opts, meta);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  meta["dropped"] = ids.size();
  pwu::save_model(model, a.out, meta);
  write_text(a.out + ".timings.csv", "phase,seconds\nretrain," + std::to_string(seconds) + "\n");
  spdlog::info("retrained without {} points: test accuracy {:.2f}%", ids.size(),
               meta["test_accuracy"].get<double>());
  manifest.input(a.model_config);
  manifest.input(ids_path);
  for (const auto& f : data_files(spec)) {
    manifest.input(f);
  }
  manifest.seed("train", opts.seed);
  manifest.output(a.out);
  manifest.write(a.out + ".manifest.json");
  return kExitOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string before;
  std::string after;
  std::string data;
  std::string ids;
  int y_unlearn = -1;
  bool mia = false;
  std::string report;
};

int run_eval(const EvalArgs& a, const CLI::App& sub) {
  Manifest manifest("eval", sub);
  json training;
  const pwu::PatchedModel before = pwu::load_model(a.before, &training);
  const pwu::PatchedModel after = pwu::load_model(a.after);
  const std::string spec = a.data.empty() ? training.value("data", "") : a.data;
  const pwu::DataBundle bundle = pwu::load_data(spec);
  std::vector<int> ids;
  if (!a.ids.empty()) {
    ids = read_ids(a.ids);
    manifest.input(a.ids);
  }
  const pwu::Dataset d_u = bundle.train.subset(ids);
  const pwu::Dataset d_r = bundle.train.without(ids);
  std::optional<int> y;
  if (a.y_unlearn >= 0) {
    y = a.y_unlearn;
  }
  const pwu::MetricsDelta m = pwu::unlearn_metrics(before, after, d_u, d_r, bundle.test, y);
  std::string text = pwu::metrics_csv(m);
  if (a.mia) {
    const double tau = pwu::mean_loss(before, bundle.train);
    char buf[200];
    std::snprintf(buf, sizeof(buf), "MIA_recall_u,%.4f,%.4f,%.4f\n", pwu::mia_recall(before, d_u, tau),
                  pwu::mia_recall(after, d_u, tau),
                  pwu::mia_recall(before, d_u, tau) - pwu::mia_recall(after, d_u, tau));
    text += buf;
    std::snprintf(buf, sizeof(buf), "MIA_threshold,%.6f,%.6f,0.0000\n", tau, tau);
    text += buf;
  }
  write_text(a.report, text);
  std::fputs(text.c_str(), stdout);
  manifest.input(a.before);
  manifest.input(a.after);
  for (const auto& f : data_files(spec)) {
    manifest.input(f);
  }
  manifest.output(a.report);
  manifest.write(a.report + ".manifest.json");
  return kExitOk;
}

// ---- report ----------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::string plot;
  std::string baseline;
};

/// Sum of a phase,seconds sidecar; nullopt when the file is missing.
std::optional<double> total_seconds(const fs::path& path) {
  if (!fs::exists(path)) {
    return std::nullopt;
  }
  std::istringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  double total = 0.0;
  while (std::getline(in, line)) {
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw pwu::ParseError("malformed timings line in " + path.string() + ": " + line);
    }
    total += std::stod(line.substr(comma + 1));
  }
  return total;
}

int run_report(const ReportArgs& a, const CLI::App& sub) {
  Manifest manifest("report", sub);
  std::optional<double> baseline;
  if (!a.baseline.empty()) {
    baseline = total_seconds(a.baseline);
    if (!baseline || *baseline <= 0.0) {
      throw pwu::ValidationError("baseline timings " + a.baseline + " are missing or empty");
    }
    manifest.input(a.baseline);
  }
  std::string table =
      "report,mode,status,total,k,delta,iterations,flip_rate,patch_count,support_count,seconds,retrain_ratio\n";
  std::string curves = "report,k,iteration,accuracy_u,residual,success\n";
  for (const auto& path : a.inputs) {
    const pwu::UnlearnReport r = pwu::report_from_text(read_text(path));
    char buf[400];
    std::snprintf(buf, sizeof(buf), "%s,%s,%s,%d,%d,%.6g,%zu,%.6f,%d,%d,", path.c_str(),
                  pwu::to_string(r.mode).c_str(), pwu::to_string(r.status).c_str(), r.total, r.k,
                  r.delta, r.iterations.size(), r.flip_rate, r.patch_count, r.support_count);
    table += buf;
    // wall clock of the run relative to retraining from scratch, when both are known
    const std::optional<double> secs = total_seconds(path + ".timings.csv");
    std::snprintf(buf, sizeof(buf), "%s,%s\n", secs ? std::to_string(*secs).c_str() : "",
                  secs && baseline ? std::to_string(*secs / *baseline).c_str() : "");
    table += buf;
    // iteration 0 is the request as received
    const int initial_residual = r.total - static_cast<int>(r.already_misclassified.size());
    std::snprintf(buf, sizeof(buf), "%s,%d,0,%.6f,%d,%.6f\n", path.c_str(), r.k,
                  100.0 * initial_residual / std::max(r.total, 1), initial_residual,
                  1.0 - static_cast<double>(initial_residual) / std::max(r.total, 1));
    curves += buf;
    for (const auto& it : r.iterations) {
      std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.6f,%d,%.6f\n", path.c_str(), r.k, it.iteration,
                    100.0 * it.residual / std::max(r.total, 1), it.residual, it.success);
      curves += buf;
    }
    manifest.input(path);
  }
  write_text(a.out, table);
  manifest.output(a.out);
  if (!a.plot.empty()) {
    write_text(a.plot, curves);
    manifest.output(a.plot);
  }
  manifest.write(a.out + ".manifest.json");
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patch-based unlearning for ReLU classifiers"};
  app.require_subcommand(1);
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Only warnings and errors");

  TrainArgs ta;
  CLI::App* train = app.add_subcommand("train", "Train a base MLP");
  train->add_option("--data", ta.data, "Data spec (blobs:..., idx:dir=..., csv:...)")->required();
  train->add_option("--arch", ta.arch, "Hidden widths, comma separated");
  train->add_option("--epochs", ta.epochs)->check(CLI::NonNegativeNumber);
  train->add_option("--lr", ta.lr)->check(CLI::PositiveNumber);
  train->add_option("--batch", ta.batch)->check(CLI::PositiveNumber);
  train->add_option("--seed", ta.seed);
  train->add_option("--out", ta.out, "Model file")->required();

  UnlearnArgs ua;
  CLI::App* unl = app.add_subcommand("unlearn", "Patch a model so it forgets selected points");
  unl->add_option("--model", ua.model)->required();
  unl->add_option("--data", ua.data, "Data spec (defaults to the one recorded at training)");
  unl->add_option("--mode", ua.mode)->check(CLI::IsMember({"single", "multi", "multipoint", "class"}));
  unl->add_option("--select", ua.select, "random:N | ids:FILE | class:C")->required();
  unl->add_option("--k", ua.k)->check(CLI::PositiveNumber);
  unl->add_option("--delta", ua.delta)->check(CLI::Range(0.0, 1.0));
  unl->add_option("--lambda", ua.lambda, "Initial support sharpness")->check(CLI::PositiveNumber);
  unl->add_option("--lambda-max", ua.lambda_max, "Largest support sharpness");
  unl->add_option("--eps", ua.eps, "Flip margin")->check(CLI::PositiveNumber);
  unl->add_option("--confusion", ua.confusion, "constant | affine");
  unl->add_option("--seed", ua.seed);
  unl->add_option("--max-iterations", ua.max_iterations)->check(CLI::PositiveNumber);
  unl->add_option("--out", ua.out, "Patched model file")->required();
  unl->add_option("--report", ua.report, "Report file")->required();

  RetrainArgs ra;
  CLI::App* retrain = app.add_subcommand("retrain", "Retrain from scratch without dropped points");
  retrain->add_option("--model-config", ra.model_config, "Model file whose training setup is repeated")
      ->required();
  retrain->add_option("--drop", ra.drop, "ids:FILE")->required();
  retrain->add_option("--data", ra.data);
  retrain->add_option("--out", ra.out)->required();

  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "Compare a model before and after unlearning");
  eval->add_option("--before", ea.before)->required();
  eval->add_option("--after", ea.after)->required();
  eval->add_option("--data", ea.data);
  eval->add_option("--ids", ea.ids, "File with the unlearned training indices");
  eval->add_option("--class", ea.y_unlearn, "Unlearned class (adds class rows)");
  eval->add_flag("--mia", ea.mia, "Loss-threshold membership inference on the unlearned points");
  eval->add_option("--report", ea.report)->required();

  ReportArgs pa;
  CLI::App* rep = app.add_subcommand("report", "Tabulate unlearn reports");
  rep->add_option("--in", pa.inputs)->required();
  rep->add_option("--out", pa.out)->required();
  rep->add_option("--plot-data", pa.plot);
  rep->add_option("--baseline", pa.baseline, "Timings sidecar of a retrain run, for time ratios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto logger = spdlog::stderr_color_mt("pwu");
  spdlog::set_default_logger(logger);
  spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);

  try {
    if (*train) {
      return run_train(ta, *train);
    }
    if (*unl) {
      return run_unlearn(ua, *unl);
    }
    if (*retrain) {
      return run_retrain(ra, *retrain);
    }
    if (*eval) {
      return run_eval(ea, *eval);
    }
    if (*rep) {
      return run_report(pa, *rep);
    }
  } catch (const UsageError& e) {
    spdlog::error("usage: {}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  }
  return kExitUsage;
}
