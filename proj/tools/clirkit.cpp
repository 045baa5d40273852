#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "clir/checkpoint.hpp"
#include "clir/config.hpp"
#include "clir/corpus.hpp"
#include "clir/error.hpp"
#include "clir/lexicon.hpp"
#include "clir/metrics.hpp"
#include "clir/nn.hpp"
#include "clir/probrank.hpp"
#include "clir/ranker.hpp"
#include "clir/rng.hpp"
#include "clir/synth.hpp"
#include "clir/train.hpp"
#include "clir/weaksup.hpp"

namespace {

using namespace clir;

std::string format_f64(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

StopwordSet resolve_stopwords(const PipelineConfig& cfg) {
  if (cfg.stopwords_path.empty()) return builtin_stopwords();
  return load_stopwords(cfg.stopwords_path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("failed while writing " + path);
}

// Pipeline settings shared by the data/training commands: a --config file
// plus typed flag overrides, flags winning over the file.
struct ConfigArgs {
  std::string config_path;
  PipelineConfig resolved;

  CLI::Option* config_opt = nullptr;
  std::vector<std::pair<CLI::Option*, std::function<void(PipelineConfig&)>>> overrides;

  void attach(CLI::App* cmd) {
    config_opt = cmd->add_option("--config", config_path, "key=value settings file");
  }

  template <typename T>
  void add(CLI::App* cmd, const std::string& flag, T& slot,
           void (*assign)(PipelineConfig&, const T&), const std::string& help) {
    CLI::Option* opt = cmd->add_option(flag, slot, help);
    overrides.emplace_back(opt, [&slot, assign](PipelineConfig& c) { assign(c, slot); });
  }

  PipelineConfig resolve() {
    PipelineConfig cfg;
    if (config_opt && config_opt->count() > 0) cfg = load_config(config_path);
    for (auto& [opt, apply] : overrides)
      if (opt->count() > 0) apply(cfg);
    cfg.validate();
    resolved = cfg;
    return cfg;
  }
};

struct SeedFlag {
  std::uint64_t seed = 0;
  CLI::Option* opt = nullptr;
  void attach(CLI::App* cmd) {
    opt = cmd->add_option("--seed", seed, "master random seed");
  }
  void fold_into(PipelineConfig& cfg) const {
    if (opt->count() > 0) cfg.seed = seed;
  }
};

ModelConfig model_config_from(const PipelineConfig& cfg, std::int64_t english_vocab,
                              std::int64_t foreign_vocab) {
  ModelConfig mc;
  mc.kind = model_kind_from_string(cfg.model_kind);
  mc.english_vocab = english_vocab;
  mc.foreign_vocab = foreign_vocab;
  mc.embed_dim = cfg.embed_dim;
  mc.num_layers = cfg.num_layers;
  mc.num_heads = cfg.num_heads;
  mc.ffn_dim = cfg.ffn_dim;
  mc.max_seq_len = cfg.max_seq_len;
  mc.seed = cfg.seed;
  return mc;
}

TrainHyper train_hyper_from(const PipelineConfig& cfg) {
  TrainHyper h;
  h.lr = cfg.lr;
  h.batch_size = cfg.batch_size;
  h.epochs = cfg.epochs;
  h.beta1 = cfg.adam_beta1;
  h.beta2 = cfg.adam_beta2;
  h.eps = cfg.adam_eps;
  h.weight_decay = cfg.weight_decay;
  h.seed = cfg.seed + 1;  // shuffle stream, distinct from parameter init
  return h;
}

Vocabulary english_vocab_of(const std::vector<BitextPair>& pairs,
                            const PipelineConfig& cfg, const StopwordSet& stopwords) {
  return Vocabulary::build(english_sides(pairs), stopwords, cfg.min_freq);
}

Vocabulary foreign_vocab_of(const std::vector<BitextPair>& pairs,
                            const PipelineConfig& cfg) {
  return Vocabulary::build(foreign_sides(pairs), StopwordSet{}, cfg.min_freq);
}

int run_synth_corpus(const SynthOptions& opts, const std::string& out_dir) {
  SynthCorpus corpus = generate_synth_corpus(opts);
  write_synth_corpus(corpus, out_dir);
  std::string echo = "# resolved synth settings\n";
  echo += "vocab_size=" + std::to_string(opts.vocab_size) + "\n";
  echo += "pairs=" + std::to_string(opts.pairs) + "\n";
  echo += "documents=" + std::to_string(opts.documents) + "\n";
  echo += "sentences_per_doc=" + std::to_string(opts.sentences_per_doc) + "\n";
  echo += "queries=" + std::to_string(opts.queries) + "\n";
  echo += "min_sentence_len=" + std::to_string(opts.min_sentence_len) + "\n";
  echo += "max_sentence_len=" + std::to_string(opts.max_sentence_len) + "\n";
  echo += "stopword_rate=" + format_f64(opts.stopword_rate) + "\n";
  echo += "seed=" + std::to_string(opts.seed) + "\n";
  write_text(out_dir + "/synth.config", echo);
  std::cout << "wrote " << out_dir << " (" << corpus.bitext.size() << " pairs, "
            << corpus.documents.size() << " documents, " << corpus.queries.size()
            << " queries)\n";
  return 0;
}

int run_build_samples(const PipelineConfig& cfg, const std::string& bitext_path,
                      const std::string& out_path) {
  BitextCorpus corpus = load_bitext(bitext_path);
  StopwordSet stopwords = resolve_stopwords(cfg);
  Vocabulary vocab = english_vocab_of(corpus.pairs, cfg, stopwords);
  std::vector<TrainingSample> samples =
      build_samples(corpus.pairs, vocab, cfg.neg_per_pos, cfg.seed);
  save_samples(samples, out_path);
  save_config_echo(cfg, out_path + ".config");
  std::cout << "wrote " << samples.size() << " samples to " << out_path << " ("
            << corpus.pairs.size() << " pairs, " << corpus.skipped_lines
            << " skipped lines)\n";
  return 0;
}

int run_train_lexicon(const PipelineConfig& cfg, const std::string& bitext_path,
                      const std::string& out_path) {
  BitextCorpus corpus = load_bitext(bitext_path);
  Model1Options opts;
  opts.iterations = cfg.em_iterations;
  opts.tol = cfg.em_tol;
  opts.use_null = cfg.em_use_null;
  Model1Result result = train_model1(corpus.pairs, opts);
  TranslationTable table = prune(result.table, cfg.em_prune_min_prob);
  save_table(table, out_path);

  std::string csv = "iteration,log_likelihood\n";
  for (std::size_t i = 0; i < result.log_likelihood.size(); ++i)
    csv += std::to_string(i + 1) + "," + format_f64(result.log_likelihood[i]) + "\n";
  write_text(out_path + ".loglik.csv", csv);
  save_config_echo(cfg, out_path + ".config");
  std::cout << "trained " << result.log_likelihood.size() << " EM iterations, final ll "
            << format_f64(result.table.final_log_likelihood) << ", wrote " << out_path
            << "\n";
  return 0;
}

int run_train_neural(const PipelineConfig& cfg, const std::string& bitext_path,
                     const std::string& samples_path, const std::string& out_path) {
  BitextCorpus corpus = load_bitext(bitext_path);
  StopwordSet stopwords = resolve_stopwords(cfg);
  Vocabulary evocab = english_vocab_of(corpus.pairs, cfg, stopwords);
  Vocabulary fvocab = foreign_vocab_of(corpus.pairs, cfg);

  std::vector<TrainingSample> samples = load_samples(samples_path);
  SampleSplit split = split_samples(samples, cfg.dev_fraction, cfg.seed + 1);

  TokenCodec codec(&evocab, &fvocab);
  auto encode_all = [&codec](const std::vector<TrainingSample>& in) {
    std::vector<EncodedSample> out;
    out.reserve(in.size());
    for (const TrainingSample& s : in) out.push_back(codec.encode(s.query, s.sentence, s.label));
    return out;
  };
  std::vector<EncodedSample> train_set = encode_all(split.train);
  std::vector<EncodedSample> dev_set = encode_all(split.dev);

  Model model = Model::init(model_config_from(cfg, evocab.size(), fvocab.size()));
  std::vector<EpochStats> curve = train(model, train_set, dev_set, train_hyper_from(cfg));

  save_checkpoint(out_path, model);
  save_vocabulary(evocab, out_path + ".evocab.tsv");
  save_vocabulary(fvocab, out_path + ".fvocab.tsv");

  std::string csv = "epoch,train_loss,train_accuracy,dev_loss,dev_accuracy\n";
  for (const EpochStats& st : curve) {
    csv += std::to_string(st.epoch) + "," + format_f64(st.train_loss) + "," +
           format_f64(st.train_accuracy) + "," + format_f64(st.dev_loss) + "," +
           format_f64(st.dev_accuracy) + "\n";
  }
  write_text(out_path + ".curve.csv", csv);
  save_config_echo(cfg, out_path + ".config");

  std::cout << "trained " << cfg.model_kind << " on " << train_set.size() << " samples ("
            << dev_set.size() << " held out)";
  if (!curve.empty()) {
    const EpochStats& last = curve.back();
    std::cout << ", final train loss " << format_f64(last.train_loss);
    if (!dev_set.empty())
      std::cout << ", dev accuracy " << format_f64(last.dev_accuracy);
  }
  std::cout << ", wrote " << out_path << "\n";
  return 0;
}

int run_rank(const PipelineConfig& cfg, const std::string& scorer_name,
             const std::string& docs_path, const std::string& queries_path,
             const std::string& qrels_path, const std::string& checkpoint_path,
             const std::string& table_path, const std::string& bitext_path,
             const std::string& out_path) {
  StopwordSet stopwords = resolve_stopwords(cfg);
  std::vector<Document> documents;
  std::vector<Query> queries;
  if (!qrels_path.empty()) {
    RetrievalInputs inputs =
        load_retrieval_inputs(docs_path, queries_path, qrels_path, stopwords);
    documents = std::move(inputs.documents);
    queries = std::move(inputs.queries);
  } else {
    documents = load_documents(docs_path);
    queries = load_queries(queries_path, stopwords);
  }

  // keep captured scorer state alive for the duration of produce_run
  std::optional<Model> model;
  std::optional<Vocabulary> evocab, fvocab;
  std::optional<TokenCodec> codec;
  std::optional<TranslationTable> table;
  std::optional<BackgroundModel> background;

  DocScorer scorer;
  if (scorer_name == "noisy_or") {
    if (checkpoint_path.empty())
      throw Error("rank: scorer noisy_or needs --checkpoint");
    model.emplace(load_checkpoint(checkpoint_path));
    evocab.emplace(load_vocabulary(checkpoint_path + ".evocab.tsv"));
    fvocab.emplace(load_vocabulary(checkpoint_path + ".fvocab.tsv"));
    codec.emplace(&*evocab, &*fvocab);
    scorer = noisy_or_scorer(neural_sentence_scorer(*model, *codec));
  } else if (scorer_name == "occurrence") {
    if (table_path.empty()) throw Error("rank: scorer occurrence needs --table");
    table.emplace(load_table(table_path));
    scorer = occurrence_doc_scorer(*table);
  } else {  // generative
    if (table_path.empty() || bitext_path.empty())
      throw Error("rank: scorer generative needs --table and --bitext");
    table.emplace(load_table(table_path));
    background.emplace(build_background(load_bitext(bitext_path).pairs));
    scorer = generative_doc_scorer(*table, *background, cfg.alpha);
  }

  Run run = produce_run(scorer, queries, documents);
  save_run(out_path, run);
  save_config_echo(cfg, out_path + ".config");
  std::cout << "ranked " << documents.size() << " documents for " << queries.size()
            << " queries with " << scorer_name << ", wrote " << out_path << "\n";
  return 0;
}

int run_evaluate(const PipelineConfig& cfg, const std::string& run_path,
                 const std::string& qrels_path, const std::string& classification_path,
                 const std::string& json_path) {
  Run run = load_run(run_path);
  Qrels qrels = load_qrels(qrels_path);

  EvalReport report;
  report.map = mean_average_precision(run, qrels);
  MqwvResult best = mqwv(run, qrels, cfg.beta);
  report.mqwv = best.value;
  double thr = cfg.threshold_is_optimal() ? best.threshold : cfg.threshold_value();
  report.threshold = thr;
  report.aqwv = aqwv(run, qrels, thr, cfg.beta);

  if (!classification_path.empty()) {
    std::ifstream in(classification_path, std::ios::binary);
    if (!in) throw IoError("cannot open " + classification_path);
    std::vector<double> preds;
    std::vector<int> labels;
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const std::size_t tab = line.find('\t');
      if (tab == std::string::npos)
        throw ParseError(classification_path + ": line " + std::to_string(lineno) +
                         ": expected prediction<TAB>label");
      try {
        preds.push_back(std::stod(line.substr(0, tab)));
        labels.push_back(std::stoi(line.substr(tab + 1)));
      } catch (const std::exception&) {
        throw ParseError(classification_path + ": line " + std::to_string(lineno) +
                         ": malformed prediction or label");
      }
    }
    ClassificationReport cls = classification_report(preds, labels, 0.5);
    report.accuracy = cls.accuracy;
    report.confusion = cls.rates;
  }

  std::cout << report.to_text();
  if (!json_path.empty()) {
    write_text(json_path, report.to_json() + "\n");
    save_config_echo(cfg, json_path + ".config");
  }
  return 0;
}

int run_gradcheck(const PipelineConfig& cfg, std::int64_t english_vocab,
                  std::int64_t foreign_vocab, std::int64_t sentence_len, double epsilon,
                  double tolerance, bool has_tolerance) {
  ModelConfig mc = model_config_from(cfg, english_vocab, foreign_vocab);
  mc.validate();
  if (sentence_len < 1) throw Error("gradcheck: sentence length must be positive");
  if (sentence_len > foreign_vocab)
    throw Error("gradcheck: sentence length exceeds the foreign vocabulary");
  Rng rng(cfg.seed);
  EncodedSample sample;
  sample.query = SpecialTokens::count +
                 static_cast<std::int64_t>(uniform_below(rng, english_vocab));
  // tokens drawn without replacement: repeated rows would differ only by
  // their position vector and leave the finite-difference check starved
  std::vector<std::int64_t> pool(static_cast<std::size_t>(foreign_vocab));
  for (std::size_t i = 0; i < pool.size(); ++i)
    pool[i] = SpecialTokens::count + english_vocab + static_cast<std::int64_t>(i);
  fisher_yates_shuffle(pool, rng);
  sample.sentence.assign(pool.begin(), pool.begin() + sentence_len);
  sample.label = static_cast<int>(uniform_below(rng, 2));

  const double err = grad_check(mc, sample, epsilon);
  std::cout << "max_rel_err\t" << format_f64(err) << "\n";
  if (has_tolerance && !(err <= tolerance))
    throw Error("gradient check failed: " + format_f64(err) + " > " +
                format_f64(tolerance));
  return 0;
}

int run_attention_dump(const std::string& checkpoint_path, const std::string& query_text,
                       const std::string& sentence_text, const std::string& out_path) {
  Model model = load_checkpoint(checkpoint_path);
  Vocabulary evocab = load_vocabulary(checkpoint_path + ".evocab.tsv");
  Vocabulary fvocab = load_vocabulary(checkpoint_path + ".fvocab.tsv");
  TokenCodec codec(&evocab, &fvocab);

  TokenSeq query_tokens = tokenize(query_text);
  if (query_tokens.size() != 1)
    throw Error("attention-dump: --query must be a single token, got " +
                std::to_string(query_tokens.size()));
  TokenSeq sentence_tokens = tokenize(sentence_text);
  if (sentence_tokens.empty()) throw Error("attention-dump: --sentence is empty");

  std::vector<std::int64_t> sentence_ids = codec.encode_sentence(sentence_tokens);
  PackedInput input =
      pack_input(codec.encode_query(query_tokens[0]), sentence_ids, model.config());
  AttentionTrace trace = model.attention_trace(input);

  nlohmann::ordered_json j;
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& layer : trace) {
    nlohmann::ordered_json heads = nlohmann::ordered_json::array();
    for (const ag::Mat& att : layer) {
      nlohmann::ordered_json m = nlohmann::ordered_json::array();
      for (Eigen::Index r = 0; r < att.rows(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index c = 0; c < att.cols(); ++c) row.push_back(att(r, c));
        m.push_back(std::move(row));
      }
      heads.push_back(std::move(m));
    }
    j["layers"].push_back(std::move(heads));
  }
  std::vector<std::string> names;
  names.reserve(input.tokens.size());
  for (std::int64_t id : input.tokens) names.push_back(codec.token_name(id));
  j["tokens"] = names;

  const std::string text = j.dump() + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text(out_path, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-lingual retrieval workbench"};
  app.require_subcommand(1);

  int rc = 0;
  auto wrap = [&rc](std::function<int()> fn) {
    return [&rc, fn = std::move(fn)]() { rc = fn(); };
  };

  // synth-corpus
  auto* synth = app.add_subcommand("synth-corpus", "generate the cipher-language corpus");
  SynthOptions synth_opts;
  std::string synth_out;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--vocab-size", synth_opts.vocab_size, "cipher vocabulary size");
  synth->add_option("--pairs", synth_opts.pairs, "bitext pairs to generate");
  synth->add_option("--documents", synth_opts.documents, "documents to generate");
  synth->add_option("--sentences-per-doc", synth_opts.sentences_per_doc,
                    "sentences per document");
  synth->add_option("--queries", synth_opts.queries, "single-word queries to draw");
  synth->add_option("--min-sentence-len", synth_opts.min_sentence_len,
                    "minimum sentence length");
  synth->add_option("--max-sentence-len", synth_opts.max_sentence_len,
                    "maximum sentence length");
  synth->add_option("--stopword-rate", synth_opts.stopword_rate,
                    "chance of splicing English filler words into bitext");
  synth->add_option("--seed", synth_opts.seed, "master random seed");
  synth->callback(wrap([&]() { return run_synth_corpus(synth_opts, synth_out); }));

  // shared config plumbing builders
  auto add_pipeline_flags = [](CLI::App* cmd, ConfigArgs& args, SeedFlag& seed) {
    args.attach(cmd);
    seed.attach(cmd);
    return cmd;
  };

  // build-samples
  auto* bs = app.add_subcommand("build-samples", "derive weak-supervision samples from bitext");
  ConfigArgs bs_cfg;
  SeedFlag bs_seed;
  std::string bs_bitext, bs_out;
  std::int64_t bs_neg = 0, bs_min_freq = 0;
  std::string bs_stopwords;
  bs->add_option("--bitext", bs_bitext, "foreign<TAB>english pairs")->required();
  bs->add_option("--out", bs_out, "samples JSONL path")->required();
  add_pipeline_flags(bs, bs_cfg, bs_seed);
  bs_cfg.add(bs, "--neg-per-pos", bs_neg,
             +[](PipelineConfig& c, const std::int64_t& v) { c.neg_per_pos = v; },
             "negatives per positive");
  bs_cfg.add(bs, "--min-freq", bs_min_freq,
             +[](PipelineConfig& c, const std::int64_t& v) { c.min_freq = v; },
             "vocabulary frequency cutoff");
  bs_cfg.add(bs, "--stopwords", bs_stopwords,
             +[](PipelineConfig& c, const std::string& v) { c.stopwords_path = v; },
             "stopword list file (default built-in)");
  bs->callback(wrap([&]() {
    PipelineConfig cfg = bs_cfg.resolve();
    bs_seed.fold_into(cfg);
    return run_build_samples(cfg, bs_bitext, bs_out);
  }));

  // train-lexicon
  auto* tl = app.add_subcommand("train-lexicon", "estimate a translation table with EM");
  ConfigArgs tl_cfg;
  SeedFlag tl_seed;
  std::string tl_bitext, tl_out;
  std::int64_t tl_iters = 0;
  double tl_tol = 0.0, tl_prune = 0.0;
  bool tl_use_null = true;
  tl->add_option("--bitext", tl_bitext, "foreign<TAB>english pairs")->required();
  tl->add_option("--out", tl_out, "translation table TSV path")->required();
  add_pipeline_flags(tl, tl_cfg, tl_seed);
  tl_cfg.add(tl, "--em-iterations", tl_iters,
             +[](PipelineConfig& c, const std::int64_t& v) { c.em_iterations = v; },
             "EM iteration cap");
  tl_cfg.add(tl, "--em-tol", tl_tol,
             +[](PipelineConfig& c, const double& v) { c.em_tol = v; },
             "log-likelihood early-stop tolerance");
  tl_cfg.add(tl, "--em-prune-min-prob", tl_prune,
             +[](PipelineConfig& c, const double& v) { c.em_prune_min_prob = v; },
             "drop entries below this probability");
  tl_cfg.add(tl, "--em-use-null", tl_use_null,
             +[](PipelineConfig& c, const bool& v) { c.em_use_null = v; },
             "include the NULL source token");
  tl->callback(wrap([&]() {
    PipelineConfig cfg = tl_cfg.resolve();
    tl_seed.fold_into(cfg);
    return run_train_lexicon(cfg, tl_bitext, tl_out);
  }));

  // train-neural
  auto* tn = app.add_subcommand("train-neural", "train a neural relevance scorer");
  ConfigArgs tn_cfg;
  SeedFlag tn_seed;
  std::string tn_bitext, tn_samples, tn_out, tn_kind, tn_stopwords;
  std::int64_t tn_embed = 0, tn_layers = 0, tn_heads = 0, tn_ffn = 0, tn_seq = 0;
  std::int64_t tn_batch = 0, tn_epochs = 0, tn_min_freq = 0;
  double tn_lr = 0.0, tn_dev = 0.0, tn_wd = 0.0;
  tn->add_option("--bitext", tn_bitext, "bitext used to rebuild vocabularies")->required();
  tn->add_option("--samples", tn_samples, "training samples JSONL")->required();
  tn->add_option("--out", tn_out, "checkpoint output path")->required();
  add_pipeline_flags(tn, tn_cfg, tn_seed);
  tn_cfg.add(tn, "--model-kind", tn_kind,
             +[](PipelineConfig& c, const std::string& v) { c.model_kind = v; },
             "cross_encoder, dot_product or qrann");
  tn_cfg.add(tn, "--embed-dim", tn_embed,
             +[](PipelineConfig& c, const std::int64_t& v) { c.embed_dim = v; },
             "embedding width");
  tn_cfg.add(tn, "--num-layers", tn_layers,
             +[](PipelineConfig& c, const std::int64_t& v) { c.num_layers = v; },
             "transformer layers");
  tn_cfg.add(tn, "--num-heads", tn_heads,
             +[](PipelineConfig& c, const std::int64_t& v) { c.num_heads = v; },
             "attention heads");
  tn_cfg.add(tn, "--ffn-dim", tn_ffn,
             +[](PipelineConfig& c, const std::int64_t& v) { c.ffn_dim = v; },
             "feed-forward width");
  tn_cfg.add(tn, "--max-seq-len", tn_seq,
             +[](PipelineConfig& c, const std::int64_t& v) { c.max_seq_len = v; },
             "packed sequence length");
  tn_cfg.add(tn, "--lr", tn_lr, +[](PipelineConfig& c, const double& v) { c.lr = v; },
             "Adam learning rate");
  tn_cfg.add(tn, "--weight-decay", tn_wd,
             +[](PipelineConfig& c, const double& v) { c.weight_decay = v; },
             "decoupled weight decay");
  tn_cfg.add(tn, "--batch-size", tn_batch,
             +[](PipelineConfig& c, const std::int64_t& v) { c.batch_size = v; },
             "minibatch size");
  tn_cfg.add(tn, "--epochs", tn_epochs,
             +[](PipelineConfig& c, const std::int64_t& v) { c.epochs = v; },
             "training epochs");
  tn_cfg.add(tn, "--dev-fraction", tn_dev,
             +[](PipelineConfig& c, const double& v) { c.dev_fraction = v; },
             "held-out pair fraction");
  tn_cfg.add(tn, "--min-freq", tn_min_freq,
             +[](PipelineConfig& c, const std::int64_t& v) { c.min_freq = v; },
             "vocabulary frequency cutoff");
  tn_cfg.add(tn, "--stopwords", tn_stopwords,
             +[](PipelineConfig& c, const std::string& v) { c.stopwords_path = v; },
             "stopword list file (default built-in)");
  tn->callback(wrap([&]() {
    PipelineConfig cfg = tn_cfg.resolve();
    tn_seed.fold_into(cfg);
    return run_train_neural(cfg, tn_bitext, tn_samples, tn_out);
  }));

  // rank
  auto* rk = app.add_subcommand("rank", "score documents for queries and write a run");
  ConfigArgs rk_cfg;
  SeedFlag rk_seed;
  std::string rk_scorer, rk_docs, rk_queries, rk_qrels, rk_ckpt, rk_table, rk_bitext,
      rk_out, rk_stopwords;
  double rk_alpha = 0.0;
  rk->add_option("--scorer", rk_scorer, "noisy_or, occurrence or generative")
      ->required()
      ->check(CLI::IsMember({"noisy_or", "occurrence", "generative"}));
  rk->add_option("--docs", rk_docs, "documents JSONL")->required();
  rk->add_option("--queries", rk_queries, "queries TSV")->required();
  rk->add_option("--qrels", rk_qrels, "judgments TSV, checked for dangling ids");
  rk->add_option("--checkpoint", rk_ckpt, "neural checkpoint (noisy_or)");
  rk->add_option("--table", rk_table, "translation table (occurrence/generative)");
  rk->add_option("--bitext", rk_bitext, "bitext for the background model (generative)");
  rk->add_option("--out", rk_out, "run file path")->required();
  add_pipeline_flags(rk, rk_cfg, rk_seed);
  rk_cfg.add(rk, "--alpha", rk_alpha,
             +[](PipelineConfig& c, const double& v) { c.alpha = v; },
             "generative mixture weight");
  rk_cfg.add(rk, "--stopwords", rk_stopwords,
             +[](PipelineConfig& c, const std::string& v) { c.stopwords_path = v; },
             "stopword list file (default built-in)");
  rk->callback(wrap([&]() {
    PipelineConfig cfg = rk_cfg.resolve();
    rk_seed.fold_into(cfg);
    return run_rank(cfg, rk_scorer, rk_docs, rk_queries, rk_qrels, rk_ckpt, rk_table,
                    rk_bitext, rk_out);
  }));

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score a run against judgments");
  ConfigArgs ev_cfg;
  SeedFlag ev_seed;
  std::string ev_run, ev_qrels, ev_cls, ev_json, ev_threshold;
  double ev_beta = 0.0;
  ev->add_option("--run", ev_run, "run file")->required();
  ev->add_option("--qrels", ev_qrels, "judgments TSV")->required();
  ev->add_option("--classification", ev_cls, "prediction<TAB>label file for accuracy");
  ev->add_option("--json", ev_json, "also write the report as JSON here");
  add_pipeline_flags(ev, ev_cfg, ev_seed);
  ev_cfg.add(ev, "--beta", ev_beta,
             +[](PipelineConfig& c, const double& v) { c.beta = v; },
             "false-alarm weight");
  ev_cfg.add(ev, "--threshold", ev_threshold,
             +[](PipelineConfig& c, const std::string& v) { c.threshold = v; },
             "detection threshold, a number or \"optimal\"");
  ev->callback(wrap([&]() {
    PipelineConfig cfg = ev_cfg.resolve();
    ev_seed.fold_into(cfg);
    return run_evaluate(cfg, ev_run, ev_qrels, ev_cls, ev_json);
  }));

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient verification");
  ConfigArgs gc_cfg;
  SeedFlag gc_seed;
  std::string gc_kind;
  std::int64_t gc_evocab = 3, gc_fvocab = 8, gc_sent_len = 5;
  std::int64_t gc_embed = 0, gc_layers = 0, gc_heads = 0, gc_ffn = 0, gc_seq = 0;
  double gc_eps = 1e-5, gc_tol = 0.0;
  add_pipeline_flags(gc, gc_cfg, gc_seed);
  gc_cfg.add(gc, "--kind", gc_kind,
             +[](PipelineConfig& c, const std::string& v) { c.model_kind = v; },
             "model kind to check");
  gc_cfg.add(gc, "--embed-dim", gc_embed,
             +[](PipelineConfig& c, const std::int64_t& v) { c.embed_dim = v; },
             "embedding width");
  gc_cfg.add(gc, "--num-layers", gc_layers,
             +[](PipelineConfig& c, const std::int64_t& v) { c.num_layers = v; },
             "transformer layers");
  gc_cfg.add(gc, "--num-heads", gc_heads,
             +[](PipelineConfig& c, const std::int64_t& v) { c.num_heads = v; },
             "attention heads");
  gc_cfg.add(gc, "--ffn-dim", gc_ffn,
             +[](PipelineConfig& c, const std::int64_t& v) { c.ffn_dim = v; },
             "feed-forward width");
  gc_cfg.add(gc, "--max-seq-len", gc_seq,
             +[](PipelineConfig& c, const std::int64_t& v) { c.max_seq_len = v; },
             "packed sequence length");
  gc->add_option("--english-vocab", gc_evocab, "toy English vocabulary size");
  gc->add_option("--foreign-vocab", gc_fvocab, "toy foreign vocabulary size");
  gc->add_option("--sentence-len", gc_sent_len, "random sentence length");
  gc->add_option("--epsilon", gc_eps, "finite-difference step");
  auto* gc_tol_opt = gc->add_option("--tolerance", gc_tol, "fail when the error exceeds this");
  gc->callback(wrap([&]() {
    PipelineConfig cfg = gc_cfg.resolve();
    gc_seed.fold_into(cfg);
    return run_gradcheck(cfg, gc_evocab, gc_fvocab, gc_sent_len, gc_eps, gc_tol,
                         gc_tol_opt->count() > 0);
  }));

  // attention-dump
  auto* ad = app.add_subcommand("attention-dump", "emit attention weights as JSON");
  std::string ad_ckpt, ad_query, ad_sentence, ad_out;
  ad->add_option("--checkpoint", ad_ckpt, "cross-encoder checkpoint")->required();
  ad->add_option("--query", ad_query, "single English query token")->required();
  ad->add_option("--sentence", ad_sentence, "foreign sentence text")->required();
  ad->add_option("--out", ad_out, "JSON output path (default stdout)");
  ad->callback(wrap([&]() {
    return run_attention_dump(ad_ckpt, ad_query, ad_sentence, ad_out);
  }));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
