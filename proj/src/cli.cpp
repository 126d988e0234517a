#include "absa/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"

#include "absa/corpus.hpp"
#include "absa/eval.hpp"
#include "absa/model.hpp"
#include "absa/threshold.hpp"

namespace absa {

namespace {

constexpr const char* kToolVersion = "0.1.0";

using nlohmann::json;

json span_json(const TokenSeq& tokens, const TokenSpan& span) {
  return {{"span", {tokens[span.start].char_start, tokens[span.end - 1].char_end}},
          {"text", tokens.join(span)}};
}

json item_json(const TokenSeq& tokens, const TaskItem& item) {
  json j = json::object();
  if (item.aspect) j["aspect"] = span_json(tokens, *item.aspect);
  if (item.opinion) j["opinion"] = span_json(tokens, *item.opinion);
  if (item.polarity) j["polarity"] = to_string(*item.polarity);
  return j;
}

TaskItem item_from_json(const json& j, const TokenSeq& tokens, const std::string& where) {
  TaskItem item;
  try {
    if (j.contains("aspect"))
      item.aspect = span_chars_to_tokens(j.at("aspect").at("span").at(0).get<int>(),
                                         j.at("aspect").at("span").at(1).get<int>(), tokens);
    if (j.contains("opinion"))
      item.opinion = span_chars_to_tokens(j.at("opinion").at("span").at(0).get<int>(),
                                          j.at("opinion").at("span").at(1).get<int>(), tokens);
    if (j.contains("polarity")) item.polarity = parse_polarity(j.at("polarity").get<std::string>());
  } catch (const json::exception& e) {
    throw std::runtime_error(where + ": malformed prediction item: " + e.what());
  }
  return item;
}

json config_json(const RunConfig& cfg) {
  return {
      {"profile", cfg.profile},
      {"encoder",
       {{"d_model", cfg.encoder.d_model},
        {"n_layers", cfg.encoder.n_layers},
        {"n_heads", cfg.encoder.n_heads},
        {"d_ff", cfg.encoder.d_ff},
        {"max_len", cfg.encoder.max_len},
        {"vocab_size", cfg.encoder.vocab_size},
        {"dropout_rate", cfg.encoder.dropout_rate},
        {"seed", cfg.encoder.seed}}},
      {"train",
       {{"learning_rate", cfg.train.learning_rate},
        {"warmup_fraction", cfg.train.warmup_fraction},
        {"epochs", cfg.train.epochs},
        {"batch_size", cfg.train.batch_size},
        {"max_steps", cfg.train.max_steps},
        {"seed", cfg.train.seed},
        {"alpha", cfg.train.weights.alpha},
        {"beta", cfg.train.weights.beta},
        {"gamma", cfg.train.weights.gamma},
        {"effective_alpha", cfg.train.effective_weights().alpha},
        {"effective_beta", cfg.train.effective_weights().beta},
        {"effective_gamma", cfg.train.effective_weights().gamma},
        {"disable_right_extraction", cfg.train.disable_right_extraction},
        {"disable_right_classification", cfg.train.disable_right_classification}}},
      {"decode",
       {{"left_threshold", cfg.decode.left.threshold},
        {"left_max_spans", cfg.decode.left.max_spans},
        {"left_max_span_len", cfg.decode.left.max_span_len},
        {"right_threshold", cfg.decode.right.threshold},
        {"right_max_spans", cfg.decode.right.max_spans},
        {"right_max_span_len", cfg.decode.right.max_span_len}}},
      {"templates",
       {{"left", cfg.templates.left},
        {"right", cfg.templates.right},
        {"opinion_only", cfg.templates.opinion_only}}},
      {"task", cfg.task},
      {"min_freq", cfg.min_freq},
      {"convert_mode", cfg.convert_mode},
      {"valid_fraction", cfg.valid_fraction},
      {"split_seed", cfg.split_seed},
      {"gradcheck",
       {{"epsilon", cfg.gc_epsilon},
        {"tolerance", cfg.gc_tolerance},
        {"coords_per_tensor", cfg.gc_coords},
        {"inputs", cfg.gc_inputs},
        {"seed", cfg.gc_seed}}},
      {"tune",
       {{"side", cfg.tune_side},
        {"grid_min", cfg.grid_min},
        {"grid_max", cfg.grid_max},
        {"grid_steps", cfg.grid_steps}}},
  };
}

void write_manifest(const std::string& path, const std::string& command,
                    const RunConfig& cfg, const json& inputs, const json& outputs) {
  json manifest = {{"tool", "absa-mrc"},    {"version", kToolVersion},
                   {"command", command},    {"config", config_json(cfg)},
                   {"inputs", inputs},      {"outputs", outputs}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest to " + path);
  out << manifest.dump(2) << "\n";
}

/// Overlays flat config-file keys onto the profile baseline.
void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (!j.is_object()) throw std::runtime_error(path + ": config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "d_model") cfg.encoder.d_model = value.get<int>();
    else if (key == "n_layers") cfg.encoder.n_layers = value.get<int>();
    else if (key == "n_heads") cfg.encoder.n_heads = value.get<int>();
    else if (key == "d_ff") cfg.encoder.d_ff = value.get<int>();
    else if (key == "max_len") cfg.encoder.max_len = value.get<int>();
    else if (key == "dropout_rate") cfg.encoder.dropout_rate = value.get<double>();
    else if (key == "model_seed") cfg.encoder.seed = value.get<uint64_t>();
    else if (key == "learning_rate") cfg.train.learning_rate = value.get<double>();
    else if (key == "warmup_fraction") cfg.train.warmup_fraction = value.get<double>();
    else if (key == "epochs") cfg.train.epochs = value.get<int>();
    else if (key == "batch_size") cfg.train.batch_size = value.get<int>();
    else if (key == "max_steps") cfg.train.max_steps = value.get<int>();
    else if (key == "train_seed") cfg.train.seed = value.get<uint64_t>();
    else if (key == "alpha") cfg.train.weights.alpha = value.get<double>();
    else if (key == "beta") cfg.train.weights.beta = value.get<double>();
    else if (key == "gamma") cfg.train.weights.gamma = value.get<double>();
    else if (key == "disable_right_extraction") cfg.train.disable_right_extraction = value.get<bool>();
    else if (key == "disable_right_classification") cfg.train.disable_right_classification = value.get<bool>();
    else if (key == "threshold_left") cfg.decode.left.threshold = value.get<double>();
    else if (key == "threshold_right") cfg.decode.right.threshold = value.get<double>();
    else if (key == "max_spans") { cfg.decode.left.max_spans = value.get<int>(); cfg.decode.right.max_spans = value.get<int>(); }
    else if (key == "max_span_len") { cfg.decode.left.max_span_len = value.get<int>(); cfg.decode.right.max_span_len = value.get<int>(); }
    else if (key == "task") cfg.task = value.get<std::string>();
    else if (key == "min_freq") cfg.min_freq = value.get<int>();
    else if (key == "convert_mode") cfg.convert_mode = value.get<std::string>();
    else if (key == "valid_fraction") cfg.valid_fraction = value.get<double>();
    else if (key == "split_seed") cfg.split_seed = value.get<uint64_t>();
    else if (key == "gc_epsilon") cfg.gc_epsilon = value.get<double>();
    else if (key == "gc_tolerance") cfg.gc_tolerance = value.get<double>();
    else if (key == "gc_coords") cfg.gc_coords = value.get<int>();
    else if (key == "gc_inputs") cfg.gc_inputs = value.get<int>();
    else if (key == "gc_seed") cfg.gc_seed = value.get<uint64_t>();
    else if (key == "tune_side") cfg.tune_side = value.get<std::string>();
    else if (key == "grid_min") cfg.grid_min = value.get<double>();
    else if (key == "grid_max") cfg.grid_max = value.get<double>();
    else if (key == "grid_steps") cfg.grid_steps = value.get<int>();
    else if (key == "template_left") cfg.templates.left = value.get<std::string>();
    else if (key == "template_right") cfg.templates.right = value.get<std::string>();
    else if (key == "template_opinion") cfg.templates.opinion_only = value.get<std::string>();
    else throw std::runtime_error(path + ": unknown config key '" + key + "'");
  }
}

ConversionMode parse_convert_mode(const std::string& mode) {
  if (mode == "dual") return ConversionMode::DualMrc;
  if (mode == "opinion") return ConversionMode::OpinionOnly;
  throw std::runtime_error("unknown conversion mode '" + mode + "' (dual or opinion)");
}

// ---- commands -------------------------------------------------------------

int cmd_convert(const RunConfig& cfg, const std::string& input, const std::string& output) {
  cfg.templates.validate();
  const auto sentences = load_dataset(input);
  const MrcDataset dataset =
      convert_to_mrc(sentences, cfg.templates, parse_convert_mode(cfg.convert_mode));
  save_mrc_dataset(dataset, output);

  std::set<std::string> aspect_keys;
  int left = 0, right = 0, opinion_only = 0;
  for (size_t i = 0; i < dataset.instances.size(); ++i) {
    const auto& inst = dataset.instances[i];
    if (inst.side == Side::Left) ++left;
    if (inst.side == Side::Right) {
      ++right;
      aspect_keys.insert(dataset.provenance[i].sentence_id + "#" +
                         to_string(*inst.given_aspect));
    }
    if (inst.side == Side::OpinionOnly) ++opinion_only;
  }
  std::cout << "sentences\t" << sentences.size() << "\n"
            << "aspects\t" << aspect_keys.size() << "\n"
            << "left_instances\t" << left << "\n"
            << "right_instances\t" << right << "\n";
  if (opinion_only > 0) std::cout << "opinion_instances\t" << opinion_only << "\n";
  write_manifest(output + ".manifest.json", "convert", cfg, {{"input", input}},
                 {{"dataset", output}});
  return 0;
}

int cmd_train(RunConfig cfg, const std::string& train_path, const std::string& vocab_out,
              const std::string& checkpoint_out, std::string trace_out) {
  cfg.templates.validate();
  if (trace_out.empty()) trace_out = checkpoint_out + ".loss.tsv";
  const auto sentences = load_dataset(train_path);
  Vocab vocab = build_vocab(sentences, cfg.templates, cfg.min_freq);
  vocab.save(vocab_out);
  cfg.encoder.vocab_size = vocab.size();

  const MrcDataset dataset =
      convert_to_mrc(sentences, cfg.templates, parse_convert_mode(cfg.convert_mode));
  Model model = Model::init(cfg.encoder, cfg.encoder.seed);
  const TrainStats stats = train(model, dataset, vocab, cfg.train);
  save_checkpoint(checkpoint_out, model);

  std::ofstream trace(trace_out, std::ios::binary);
  if (!trace) throw std::runtime_error("cannot write loss trace to " + trace_out);
  char line[64];
  trace << "epoch\tmean_loss\n";
  for (size_t e = 0; e < stats.epoch_mean_loss.size(); ++e) {
    std::snprintf(line, sizeof(line), "%zu\t%.12g\n", e + 1, stats.epoch_mean_loss[e]);
    trace << line;
  }
  trace.close();

  write_manifest(checkpoint_out + ".manifest.json", "train", cfg,
                 {{"train", train_path}},
                 {{"checkpoint", checkpoint_out},
                  {"vocab", vocab_out},
                  {"loss_trace", trace_out}});
  std::cout << "instances\t" << dataset.size() << "\n"
            << "steps\t" << stats.steps << "\n";
  if (!stats.epoch_mean_loss.empty()) {
    std::snprintf(line, sizeof(line), "%.12g", stats.epoch_mean_loss.front());
    std::cout << "first_epoch_loss\t" << line << "\n";
    std::snprintf(line, sizeof(line), "%.12g", stats.epoch_mean_loss.back());
    std::cout << "last_epoch_loss\t" << line << "\n";
  }
  return 0;
}

int cmd_infer(const RunConfig& cfg, const std::string& checkpoint_path,
              const std::string& vocab_path, const std::string& input,
              const std::string& output) {
  cfg.templates.validate();
  const Subtask task = parse_subtask(cfg.task);
  const Model model = load_checkpoint(checkpoint_path);
  const Vocab vocab = Vocab::load(vocab_path);
  ModelScorer scorer(model, vocab, model.encoder.config.max_len);

  const auto sentences = load_dataset(input);
  if (task == Subtask::SC || task == Subtask::AOE) {
    for (const auto& s : sentences)
      if (s.triples.empty())
        throw std::runtime_error("task " + std::string(to_string(task)) +
                                 " needs gold aspects, but sentence '" + s.id +
                                 "' has none");
  }

  std::ofstream out(output, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write predictions to " + output);
  for (const auto& s : sentences) {
    const auto items = run_task(task, scorer, s, cfg.templates, cfg.decode);
    json ja = json::array();
    for (const auto& item : items) ja.push_back(item_json(s.tokens, item));
    const json record = {{"id", s.id}, {"task", to_string(task)}, {"output", ja}};
    out << record.dump() << "\n";
  }
  out.close();
  write_manifest(output + ".manifest.json", "infer", cfg,
                 {{"checkpoint", checkpoint_path}, {"vocab", vocab_path}, {"input", input}},
                 {{"predictions", output}});
  return 0;
}

int cmd_eval(const RunConfig& cfg, const std::string& predictions_path,
             const std::string& gold_path, const std::string& report_path) {
  const Subtask task = parse_subtask(cfg.task);
  const auto sentences = load_dataset(gold_path);
  std::map<std::string, const LabeledSentence*> by_id;
  for (const auto& s : sentences) by_id[s.id] = &s;

  std::ifstream in(predictions_path);
  if (!in) throw std::runtime_error("cannot open predictions file " + predictions_path);
  std::vector<SentencePrediction> predictions;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = predictions_path + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
    const std::string id = j.at("id").get<std::string>();
    const auto found = by_id.find(id);
    if (found == by_id.end())
      throw std::runtime_error(where + ": prediction for unknown sentence id " + id);
    SentencePrediction sp;
    sp.sentence_id = id;
    for (const auto& item : j.at("output"))
      sp.items.push_back(item_from_json(item, found->second->tokens, where));
    predictions.push_back(std::move(sp));
  }

  std::vector<SentencePrediction> gold;
  for (const auto& s : sentences) gold.push_back({s.id, gold_items(task, s)});

  const Metrics metrics = evaluate_task(task, predictions, gold);
  const std::vector<std::pair<std::string, Metrics>> rows = {{to_string(task), metrics}};
  const std::string tsv = format_score_report(rows);
  std::cout << tsv;
  if (!report_path.empty()) {
    write_score_report(report_path, rows);
    std::ofstream js(report_path + ".json", std::ios::binary);
    if (!js) throw std::runtime_error("cannot write report to " + report_path + ".json");
    js << format_score_json(rows);
    write_manifest(report_path + ".manifest.json", "eval", cfg,
                   {{"predictions", predictions_path}, {"gold", gold_path}},
                   {{"report", report_path}, {"report_json", report_path + ".json"}});
  }
  return 0;
}

/// Deterministic throwaway inputs for the finite-difference sweep.
struct GradcheckData {
  Vocab vocab;
  std::vector<MrcInstance> instances;
};

GradcheckData gradcheck_inputs(const RunConfig& cfg) {
  const std::vector<std::string> words = {
      "the", "food", "service", "screen", "battery", "was", "really", "quite",
      "great", "awful", "fine", "but", "and", "not", "so", "."};
  GradcheckData data;
  for (const auto& t : cfg.templates.all_tokens()) data.vocab.add(lowercase(t));
  for (const auto& w : words) data.vocab.add(w);

  Rng rng(cfg.gc_seed);
  for (int i = 0; i < cfg.gc_inputs; ++i) {
    const int len = 5 + rng.uniform_int(5);
    std::string text;
    for (int k = 0; k < len; ++k) {
      if (k) text += " ";
      text += words[rng.uniform_int(static_cast<int>(words.size()))];
    }
    MrcInstance inst;
    inst.context = tokenize(text);
    const int a = rng.uniform_int(len);
    const int b = a + 1 + rng.uniform_int(std::min(2, len - a));
    switch (i % 3) {
      case 0:
        inst.side = Side::Left;
        inst.query = tokenize(cfg.templates.left).surfaces();
        inst.answer_spans = {{a, b}};
        break;
      case 1:
        inst.side = Side::Right;
        inst.query = tokenize(cfg.templates.make_right_query(words[i % words.size()])).surfaces();
        inst.answer_spans = {{a, b}};
        inst.polarity_label = static_cast<Polarity>(rng.uniform_int(kNumPolarities));
        inst.given_aspect = TokenSpan{a, b};
        break;
      default:
        inst.side = Side::OpinionOnly;
        inst.query = tokenize(cfg.templates.opinion_only).surfaces();
        inst.answer_spans = {};  // exercises the no-answer sentinel
        break;
    }
    data.instances.push_back(std::move(inst));
  }
  return data;
}

int cmd_gradcheck(RunConfig cfg) {
  cfg.templates.validate();
  const GradcheckData data = gradcheck_inputs(cfg);
  cfg.encoder.vocab_size = data.vocab.size();
  cfg.encoder.dropout_rate = 0.0;  // the check runs the deterministic path

  double worst = 0.0;
  for (const auto& inst : data.instances) {
    const std::vector<const MrcInstance*> batch = {&inst};
    worst = std::max(worst, model_grad_check(cfg.encoder, batch, data.vocab,
                                             cfg.train.weights, cfg.gc_epsilon,
                                             cfg.gc_coords));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max_relative_error\t%.6e\ntolerance\t%.6e\n",
                worst, cfg.gc_tolerance);
  std::cout << buf;
  const bool ok = worst < cfg.gc_tolerance;
  std::cout << (ok ? "gradcheck\tpass\n" : "gradcheck\tfail\n");
  return ok ? 0 : 1;
}

int cmd_tune(const RunConfig& cfg, const std::string& checkpoint_path,
             const std::string& vocab_path, const std::string& input,
             const std::string& report_path) {
  cfg.templates.validate();
  if (cfg.grid_steps < 1) throw std::runtime_error("grid_steps must be >= 1");
  const Subtask task = parse_subtask(cfg.task);
  Side side;
  if (cfg.tune_side == "left") side = Side::Left;
  else if (cfg.tune_side == "right") side = Side::Right;
  else throw std::runtime_error("tune side must be left or right");

  const Model model = load_checkpoint(checkpoint_path);
  const Vocab vocab = Vocab::load(vocab_path);
  ModelScorer scorer(model, vocab, model.encoder.config.max_len);
  const auto sentences = load_dataset(input);

  std::vector<double> grid;
  for (int i = 0; i < cfg.grid_steps; ++i) {
    grid.push_back(cfg.grid_steps == 1
                       ? cfg.grid_min
                       : cfg.grid_min + (cfg.grid_max - cfg.grid_min) * i / (cfg.grid_steps - 1));
  }
  const ThresholdSweep sweep =
      tune_threshold(scorer, sentences, cfg.templates, task, cfg.decode, side, grid);

  std::string table = "threshold\tprecision\trecall\tf1\n";
  char line[128];
  for (const auto& p : sweep.points) {
    std::snprintf(line, sizeof(line), "%.6f\t%.6f\t%.6f\t%.6f\n", p.threshold,
                  p.metrics.precision, p.metrics.recall, p.metrics.f1);
    table += line;
  }
  std::snprintf(line, sizeof(line), "best\t%.6f\n", sweep.best);
  table += line;
  std::cout << table;
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write report to " + report_path);
    out << table;
    write_manifest(report_path + ".manifest.json", "tune-threshold", cfg,
                   {{"checkpoint", checkpoint_path}, {"vocab", vocab_path}, {"input", input}},
                   {{"report", report_path}});
  }
  return 0;
}

}  // namespace

RunConfig profile_config(const std::string& name) {
  RunConfig cfg;  // struct defaults are the paper profile
  cfg.profile = name;
  if (name == "paper") return cfg;
  if (name == "smoke") {
    // Calibrated once on a held-aside reference corpus and frozen: these
    // values reach triple F1 >= 0.95 on desk-scale synthetic training sets
    // within the 300-step cap, with margin across corpus seeds. The right
    // threshold cuts low-scoring opinion spans leaking in from a sentence's
    // other clause; gold spans score far above it after convergence.
    cfg.encoder.d_model = 64;
    cfg.encoder.n_layers = 2;
    cfg.encoder.n_heads = 2;
    cfg.encoder.d_ff = 128;
    cfg.encoder.max_len = 48;
    cfg.encoder.dropout_rate = 0.0;
    cfg.train.learning_rate = 3e-3;
    cfg.train.warmup_fraction = 0.2;
    cfg.train.epochs = 40;
    cfg.train.batch_size = 96;
    cfg.train.max_steps = 300;
    cfg.train.weights = {0.25, 0.5, 0.25};
    cfg.decode.left.max_spans = 4;
    cfg.decode.left.max_span_len = 4;
    cfg.decode.right.threshold = 6.5;
    cfg.decode.right.max_spans = 4;
    cfg.decode.right.max_span_len = 4;
    return cfg;
  }
  throw std::runtime_error("unknown profile '" + name + "' (paper or smoke)");
}

int run_cli(const std::vector<std::string>& args) {
  try {
    // The profile and config file form the baseline, so they are read before
    // the full flag parse; flags then override whatever they set.
    std::string profile = "paper", config_file;
    for (size_t i = 0; i < args.size(); ++i) {
      auto grab = [&](const std::string& name, std::string& into) {
        if (args[i] == name && i + 1 < args.size()) into = args[i + 1];
        else if (args[i].rfind(name + "=", 0) == 0) into = args[i].substr(name.size() + 1);
      };
      grab("--profile", profile);
      grab("--config", config_file);
    }
    RunConfig cfg = profile_config(profile);
    if (!config_file.empty()) apply_config_file(cfg, config_file);

    CLI::App app{"aspect-based sentiment triple extraction"};
    app.require_subcommand(1);
    std::string sink_profile, sink_config;

    auto add_common = [&](CLI::App* sub) {
      sub->add_option("--profile", sink_profile, "baseline profile: paper or smoke");
      sub->add_option("--config", sink_config, "JSON config file overlaying the profile");
      sub->add_option("--template-left", cfg.templates.left);
      sub->add_option("--template-right", cfg.templates.right);
      sub->add_option("--template-opinion", cfg.templates.opinion_only);
    };
    auto add_decode = [&](CLI::App* sub) {
      sub->add_option("--threshold-left", cfg.decode.left.threshold);
      sub->add_option("--threshold-right", cfg.decode.right.threshold);
      sub->add_option("--max-spans", [&cfg](const CLI::results_t& r) {
        cfg.decode.left.max_spans = cfg.decode.right.max_spans = std::stoi(r[0]);
        return true;
      }, "span cap for both sides");
      sub->add_option("--max-span-len", [&cfg](const CLI::results_t& r) {
        cfg.decode.left.max_span_len = cfg.decode.right.max_span_len = std::stoi(r[0]);
        return true;
      }, "span length cap for both sides");
    };

    std::string input, output, train_path, vocab_path, checkpoint_path, trace_path;
    std::string predictions_path, gold_path, report_path;

    CLI::App* convert = app.add_subcommand("convert", "sentences -> MRC instances");
    add_common(convert);
    convert->add_option("--input", input)->required();
    convert->add_option("--output", output)->required();
    convert->add_option("--mode", cfg.convert_mode, "dual or opinion");

    CLI::App* train_cmd = app.add_subcommand("train", "train a model");
    add_common(train_cmd);
    train_cmd->add_option("--train", train_path)->required();
    train_cmd->add_option("--vocab-out", vocab_path)->required();
    train_cmd->add_option("--checkpoint-out", checkpoint_path)->required();
    train_cmd->add_option("--loss-trace", trace_path);
    train_cmd->add_option("--lr", cfg.train.learning_rate);
    train_cmd->add_option("--warmup-fraction", cfg.train.warmup_fraction);
    train_cmd->add_option("--epochs", cfg.train.epochs);
    train_cmd->add_option("--batch-size", cfg.train.batch_size);
    train_cmd->add_option("--max-steps", cfg.train.max_steps);
    train_cmd->add_option("--seed", cfg.train.seed);
    train_cmd->add_option("--model-seed", cfg.encoder.seed);
    train_cmd->add_option("--alpha", cfg.train.weights.alpha);
    train_cmd->add_option("--beta", cfg.train.weights.beta);
    train_cmd->add_option("--gamma", cfg.train.weights.gamma);
    train_cmd->add_flag("--disable-right-extraction", cfg.train.disable_right_extraction);
    train_cmd->add_flag("--disable-right-classification", cfg.train.disable_right_classification);
    train_cmd->add_option("--d-model", cfg.encoder.d_model);
    train_cmd->add_option("--n-layers", cfg.encoder.n_layers);
    train_cmd->add_option("--n-heads", cfg.encoder.n_heads);
    train_cmd->add_option("--d-ff", cfg.encoder.d_ff);
    train_cmd->add_option("--max-len", cfg.encoder.max_len);
    train_cmd->add_option("--dropout", cfg.encoder.dropout_rate);
    train_cmd->add_option("--min-freq", cfg.min_freq);

    CLI::App* infer = app.add_subcommand("infer", "run a subtask over sentences");
    add_common(infer);
    add_decode(infer);
    infer->add_option("--checkpoint", checkpoint_path)->required();
    infer->add_option("--vocab", vocab_path)->required();
    infer->add_option("--input", input)->required();
    infer->add_option("--output", output)->required();
    infer->add_option("--task", cfg.task, "ae|oe|sc|aoe|aesc|pair|triple");

    CLI::App* eval_cmd = app.add_subcommand("eval", "score predictions against gold");
    add_common(eval_cmd);
    eval_cmd->add_option("--predictions", predictions_path)->required();
    eval_cmd->add_option("--gold", gold_path)->required();
    eval_cmd->add_option("--task", cfg.task);
    eval_cmd->add_option("--report", report_path);

    CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient audit");
    add_common(gradcheck);
    gradcheck->add_option("--epsilon", cfg.gc_epsilon);
    gradcheck->add_option("--tolerance", cfg.gc_tolerance);
    gradcheck->add_option("--coords-per-tensor", cfg.gc_coords);
    gradcheck->add_option("--inputs", cfg.gc_inputs);
    gradcheck->add_option("--seed", cfg.gc_seed);
    gradcheck->add_option("--d-model", cfg.encoder.d_model);
    gradcheck->add_option("--n-layers", cfg.encoder.n_layers);
    gradcheck->add_option("--n-heads", cfg.encoder.n_heads);
    gradcheck->add_option("--d-ff", cfg.encoder.d_ff);
    gradcheck->add_option("--alpha", cfg.train.weights.alpha);
    gradcheck->add_option("--beta", cfg.train.weights.beta);
    gradcheck->add_option("--gamma", cfg.train.weights.gamma);

    CLI::App* tune = app.add_subcommand("tune-threshold", "grid-search a decode threshold");
    add_common(tune);
    add_decode(tune);
    tune->add_option("--checkpoint", checkpoint_path)->required();
    tune->add_option("--vocab", vocab_path)->required();
    tune->add_option("--input", input)->required();
    tune->add_option("--task", cfg.task);
    tune->add_option("--side", cfg.tune_side, "left or right");
    tune->add_option("--grid-min", cfg.grid_min);
    tune->add_option("--grid-max", cfg.grid_max);
    tune->add_option("--grid-steps", cfg.grid_steps);
    tune->add_option("--report", report_path);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      return app.exit(e);
    }

    if (convert->parsed()) return cmd_convert(cfg, input, output);
    if (train_cmd->parsed())
      return cmd_train(cfg, train_path, vocab_path, checkpoint_path, trace_path);
    if (infer->parsed()) return cmd_infer(cfg, checkpoint_path, vocab_path, input, output);
    if (eval_cmd->parsed()) return cmd_eval(cfg, predictions_path, gold_path, report_path);
    if (gradcheck->parsed()) return cmd_gradcheck(cfg);
    if (tune->parsed())
      return cmd_tune(cfg, checkpoint_path, vocab_path, input, report_path);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace absa
