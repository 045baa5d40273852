#include "clir/nn.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "clir/error.hpp"
#include "clir/rng.hpp"

namespace clir {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kProbFloor = 1e-12;
constexpr double kInitStd = 0.02;

enum class InitKind { normal, zero, one };

struct ParamSpec {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  InitKind init = InitKind::normal;
};

std::map<std::string, ParamSpec> param_specs(const ModelConfig& cfg) {
  std::map<std::string, ParamSpec> specs;
  const Eigen::Index v = cfg.total_vocab();
  const Eigen::Index d = cfg.embed_dim;
  const Eigen::Index f = cfg.ffn_dim;
  specs["embed.token"] = {v, d, InitKind::normal};
  switch (cfg.kind) {
    case ModelKind::cross_encoder: {
      specs["embed.segment"] = {2, d, InitKind::normal};
      specs["embed.position"] = {static_cast<Eigen::Index>(cfg.max_seq_len), d,
                                 InitKind::normal};
      for (std::int64_t i = 0; i < cfg.num_layers; ++i) {
        std::string p = "layer" + std::to_string(i) + ".";
        for (const char* w : {"wq", "wk", "wv", "wo"})
          specs[p + "attn." + w] = {d, d, InitKind::normal};
        // no key bias: softmax is shift invariant, so its gradient is zero
        for (const char* b : {"bq", "bv", "bo"})
          specs[p + "attn." + b] = {1, d, InitKind::zero};
        specs[p + "ln1.gain"] = {1, d, InitKind::one};
        specs[p + "ln1.bias"] = {1, d, InitKind::zero};
        specs[p + "ffn.w1"] = {d, f, InitKind::normal};
        specs[p + "ffn.b1"] = {1, f, InitKind::zero};
        specs[p + "ffn.w2"] = {f, d, InitKind::normal};
        specs[p + "ffn.b2"] = {1, d, InitKind::zero};
        specs[p + "ln2.gain"] = {1, d, InitKind::one};
        specs[p + "ln2.bias"] = {1, d, InitKind::zero};
      }
      specs["head.w"] = {d, 1, InitKind::normal};
      specs["head.b"] = {1, 1, InitKind::zero};
      break;
    }
    case ModelKind::dot_product: {
      specs["attn.w"] = {d, d, InitKind::normal};
      break;
    }
    case ModelKind::qrann: {
      specs["attn.w"] = {d, d, InitKind::normal};
      specs["ffn.w1"] = {3 * d, f, InitKind::normal};
      specs["ffn.b1"] = {1, f, InitKind::zero};
      specs["ffn.w2"] = {f, 1, InitKind::normal};
      specs["ffn.b2"] = {1, 1, InitKind::zero};
      break;
    }
  }
  return specs;
}

std::vector<std::int64_t> truncate_sentence(std::span<const std::int64_t> sentence,
                                            const ModelConfig& cfg) {
  if (sentence.empty()) throw Error("neural model: sentence has no tokens");
  std::size_t cap = static_cast<std::size_t>(cfg.sentence_capacity());
  std::vector<std::int64_t> out(sentence.begin(),
                                sentence.begin() + std::min(sentence.size(), cap));
  return out;
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::cross_encoder: return "cross_encoder";
    case ModelKind::dot_product: return "dot_product";
    case ModelKind::qrann: return "qrann";
  }
  throw ContractError("unknown model kind");
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "cross_encoder") return ModelKind::cross_encoder;
  if (name == "dot_product") return ModelKind::dot_product;
  if (name == "qrann") return ModelKind::qrann;
  throw Error("unknown model kind: " + name);
}

void ModelConfig::validate() const {
  if (english_vocab < 1) throw Error("model config: english_vocab must be positive");
  if (foreign_vocab < 1) throw Error("model config: foreign_vocab must be positive");
  if (embed_dim < 1) throw Error("model config: embed_dim must be positive");
  if (num_heads < 1) throw Error("model config: num_heads must be positive");
  if (embed_dim % num_heads != 0)
    throw Error("model config: embed_dim must be divisible by num_heads");
  if (num_layers < 0) throw Error("model config: num_layers must not be negative");
  if (ffn_dim < 1) throw Error("model config: ffn_dim must be positive");
  if (max_seq_len < 5)
    throw Error("model config: max_seq_len must be at least 5 to fit [CLS] q [SEP] s [SEP]");
}

std::string ModelConfig::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = to_string(kind);
  j["english_vocab"] = english_vocab;
  j["foreign_vocab"] = foreign_vocab;
  j["embed_dim"] = embed_dim;
  j["num_layers"] = num_layers;
  j["num_heads"] = num_heads;
  j["ffn_dim"] = ffn_dim;
  j["max_seq_len"] = max_seq_len;
  j["seed"] = seed;
  return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  ModelConfig cfg;
  try {
    cfg.kind = model_kind_from_string(j.at("kind").get<std::string>());
    cfg.english_vocab = j.at("english_vocab").get<std::int64_t>();
    cfg.foreign_vocab = j.at("foreign_vocab").get<std::int64_t>();
    cfg.embed_dim = j.at("embed_dim").get<std::int64_t>();
    cfg.num_layers = j.at("num_layers").get<std::int64_t>();
    cfg.num_heads = j.at("num_heads").get<std::int64_t>();
    cfg.ffn_dim = j.at("ffn_dim").get<std::int64_t>();
    cfg.max_seq_len = j.at("max_seq_len").get<std::int64_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

PackedInput pack_input(std::int64_t query_id, std::span<const std::int64_t> sentence_ids,
                       const ModelConfig& config) {
  config.validate();
  if (query_id < 0 || query_id >= config.total_vocab())
    throw ContractError("pack_input: query id out of range");
  for (std::int64_t s : sentence_ids)
    if (s < 0 || s >= config.total_vocab())
      throw ContractError("pack_input: sentence id out of range");
  std::vector<std::int64_t> sent = truncate_sentence(sentence_ids, config);

  const std::size_t n = static_cast<std::size_t>(config.max_seq_len);
  PackedInput in;
  in.tokens.assign(n, SpecialTokens::pad);
  in.segments.assign(n, 0);
  in.positions.resize(n);
  for (std::size_t i = 0; i < n; ++i) in.positions[i] = static_cast<std::int64_t>(i);
  in.mask.assign(n, 0);

  std::size_t at = 0;
  in.tokens[at++] = SpecialTokens::cls;
  in.tokens[at++] = query_id;
  in.tokens[at++] = SpecialTokens::sep;
  for (std::int64_t s : sent) {
    in.tokens[at] = s;
    in.segments[at] = 1;
    ++at;
  }
  in.tokens[at] = SpecialTokens::sep;
  in.segments[at] = 1;
  ++at;
  in.real_len = static_cast<std::int64_t>(at);
  for (std::size_t i = 0; i < at; ++i) in.mask[i] = 1;
  return in;
}

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  for (const auto& [name, spec] : param_specs(config_))
    params_.emplace(name, ag::Parameter(name, spec.rows, spec.cols));
}

Model Model::init(const ModelConfig& config) {
  Model m(config);
  auto specs = param_specs(m.config_);
  Rng rng(config.seed);
  for (auto& [name, p] : m.params_) {
    const ParamSpec& spec = specs.at(name);
    switch (spec.init) {
      case InitKind::normal:
        for (Eigen::Index r = 0; r < p.value.rows(); ++r)
          for (Eigen::Index c = 0; c < p.value.cols(); ++c)
            p.value(r, c) = kInitStd * normal01(rng);
        break;
      case InitKind::zero:
        break;
      case InitKind::one:
        p.value.setOnes();
        break;
    }
  }
  return m;
}

ag::Parameter& Model::param(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("model has no parameter named " + name);
  return it->second;
}

const ag::Parameter& Model::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("model has no parameter named " + name);
  return it->second;
}

void Model::zero_grad() {
  for (auto& [name, p] : params_) p.zero_grad();
}

ag::Var Model::build_cross_encoder(ag::Tape& tape, const PackedInput& input,
                                   AttentionTrace* trace) {
  const Eigen::Index max_len = config_.max_seq_len;
  const std::int64_t real = input.real_len;
  if (real < 4 || real > max_len)
    throw ContractError("cross encoder: packed input has invalid real_len");
  const std::size_t len = static_cast<std::size_t>(real);

  // only the real prefix enters the graph, so PAD filler cannot influence
  // the score in any bit
  std::span<const std::int64_t> tok(input.tokens.data(), len);
  std::span<const std::int64_t> seg(input.segments.data(), len);
  std::span<const std::int64_t> pos(input.positions.data(), len);

  ag::Var x = ag::add(
      ag::add(ag::gather_rows(tape, param("embed.token"), tok),
              ag::gather_rows(tape, param("embed.segment"), seg)),
      ag::gather_rows(tape, param("embed.position"), pos));

  const Eigen::Index dk = config_.head_dim();
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dk));

  if (trace) {
    trace->assign(static_cast<std::size_t>(config_.num_layers),
                  std::vector<ag::Mat>(static_cast<std::size_t>(config_.num_heads),
                                       ag::Mat::Zero(max_len, max_len)));
  }

  for (std::int64_t i = 0; i < config_.num_layers; ++i) {
    std::string p = "layer" + std::to_string(i) + ".";
    ag::Var q = ag::add_rowvec(ag::matmul(x, tape.param(param(p + "attn.wq"))),
                               tape.param(param(p + "attn.bq")));
    ag::Var k = ag::matmul(x, tape.param(param(p + "attn.wk")));
    ag::Var v = ag::add_rowvec(ag::matmul(x, tape.param(param(p + "attn.wv"))),
                               tape.param(param(p + "attn.bv")));

    std::vector<ag::Var> heads;
    heads.reserve(static_cast<std::size_t>(config_.num_heads));
    for (std::int64_t h = 0; h < config_.num_heads; ++h) {
      ag::Var qh = ag::cols(q, h * dk, dk);
      ag::Var kh = ag::cols(k, h * dk, dk);
      ag::Var vh = ag::cols(v, h * dk, dk);
      ag::Var att = ag::softmax_rows(ag::scale(ag::matmul_nt(qh, kh), att_scale));
      if (trace)
        (*trace)[static_cast<std::size_t>(i)][static_cast<std::size_t>(h)]
            .topLeftCorner(real, real) = att.value();
      heads.push_back(ag::matmul(att, vh));
    }
    ag::Var merged = ag::hconcat(heads);
    ag::Var proj = ag::add_rowvec(ag::matmul(merged, tape.param(param(p + "attn.wo"))),
                                  tape.param(param(p + "attn.bo")));
    x = ag::layer_norm_rows(ag::add(x, proj), tape.param(param(p + "ln1.gain")),
                            tape.param(param(p + "ln1.bias")), kLayerNormEps);

    ag::Var hidden = ag::gelu(ag::add_rowvec(ag::matmul(x, tape.param(param(p + "ffn.w1"))),
                                             tape.param(param(p + "ffn.b1"))));
    ag::Var ffn = ag::add_rowvec(ag::matmul(hidden, tape.param(param(p + "ffn.w2"))),
                                 tape.param(param(p + "ffn.b2")));
    x = ag::layer_norm_rows(ag::add(x, ffn), tape.param(param(p + "ln2.gain")),
                            tape.param(param(p + "ln2.bias")), kLayerNormEps);
  }

  ag::Var cls = ag::rows(x, 0, 1);
  return ag::add(ag::matmul(cls, tape.param(param("head.w"))),
                 tape.param(param("head.b")));
}

ag::Var Model::build_context(ag::Tape& tape, std::int64_t query,
                             std::span<const std::int64_t> sentence, ag::Var& query_vec) {
  std::vector<std::int64_t> sent = truncate_sentence(sentence, config_);
  std::vector<std::int64_t> qid{query};
  query_vec = ag::gather_rows(tape, param("embed.token"), qid);
  ag::Var embeds = ag::gather_rows(tape, param("embed.token"), sent);
  ag::Var logits =
      ag::matmul_nt(ag::matmul(query_vec, tape.param(param("attn.w"))), embeds);
  ag::Var weights = ag::softmax_rows(logits);
  return ag::matmul(weights, embeds);
}

ag::Var Model::build_logit(ag::Tape& tape, std::int64_t query,
                           std::span<const std::int64_t> sentence, AttentionTrace* trace) {
  if (query < 0 || query >= config_.total_vocab())
    throw ContractError("model: query id out of range");
  switch (config_.kind) {
    case ModelKind::cross_encoder: {
      PackedInput in = pack_input(query, sentence, config_);
      return build_cross_encoder(tape, in, trace);
    }
    case ModelKind::dot_product: {
      if (trace) throw Error("attention trace requires a cross_encoder model");
      ag::Var eq;
      ag::Var ctx = build_context(tape, query, sentence, eq);
      return ag::matmul_nt(eq, ctx);
    }
    case ModelKind::qrann: {
      if (trace) throw Error("attention trace requires a cross_encoder model");
      ag::Var eq;
      ag::Var ctx = build_context(tape, query, sentence, eq);
      std::vector<ag::Var> parts{eq, ctx, ag::mul(eq, ctx)};
      ag::Var feat = ag::hconcat(parts);
      ag::Var hidden = ag::gelu(ag::add_rowvec(
          ag::matmul(feat, tape.param(param("ffn.w1"))), tape.param(param("ffn.b1"))));
      return ag::add(ag::matmul(hidden, tape.param(param("ffn.w2"))),
                     tape.param(param("ffn.b2")));
    }
  }
  throw ContractError("unknown model kind");
}

double Model::score(std::int64_t query, std::span<const std::int64_t> sentence) {
  ag::Tape tape;
  ag::Var z = build_logit(tape, query, sentence);
  double p = ag::sigmoid_value(z.value()(0, 0));
  return std::clamp(p, kProbFloor, 1.0 - kProbFloor);
}

AttentionTrace Model::attention_trace(const PackedInput& input) {
  if (config_.kind != ModelKind::cross_encoder)
    throw Error("attention trace requires a cross_encoder model");
  ag::Tape tape;
  AttentionTrace trace;
  build_cross_encoder(tape, input, &trace);
  return trace;
}

TokenCodec::TokenCodec(const Vocabulary* english, const Vocabulary* foreign)
    : english_(english), foreign_(foreign) {
  if (!english_ || !foreign_) throw ContractError("token codec: missing vocabulary");
}

std::int64_t TokenCodec::encode_query(const std::string& term) const {
  if (auto id = english_->id_of(term))
    return SpecialTokens::count + static_cast<std::int64_t>(*id);
  return SpecialTokens::unk;
}

std::vector<std::int64_t> TokenCodec::encode_sentence(const TokenSeq& tokens) const {
  std::vector<std::int64_t> out;
  out.reserve(tokens.size());
  const std::int64_t base = SpecialTokens::count + english_size();
  for (const std::string& tok : tokens) {
    if (auto id = foreign_->id_of(tok))
      out.push_back(base + static_cast<std::int64_t>(*id));
    else
      out.push_back(SpecialTokens::unk);
  }
  return out;
}

EncodedSample TokenCodec::encode(const std::string& query_term, const TokenSeq& sentence,
                                 int label) const {
  EncodedSample s;
  s.query = encode_query(query_term);
  s.sentence = encode_sentence(sentence);
  s.label = label;
  return s;
}

std::string TokenCodec::token_name(std::int64_t id) const {
  if (id == SpecialTokens::pad) return "<PAD>";
  if (id == SpecialTokens::unk) return "<UNK>";
  if (id == SpecialTokens::cls) return "<CLS>";
  if (id == SpecialTokens::sep) return "<SEP>";
  std::int64_t e = id - SpecialTokens::count;
  if (e >= 0 && e < english_size()) return english_->entry(e).token;
  std::int64_t f = e - english_size();
  if (f >= 0 && f < foreign_size()) return foreign_->entry(f).token;
  throw ContractError("token codec: id out of range");
}

std::int64_t TokenCodec::english_size() const { return english_->size(); }

std::int64_t TokenCodec::foreign_size() const { return foreign_->size(); }

double bce_loss(double prediction, int label) {
  if (label != 0 && label != 1) throw ContractError("bce_loss: label must be 0 or 1");
  double p = std::clamp(prediction, kProbFloor, 1.0 - kProbFloor);
  return label == 1 ? -std::log(p) : -std::log(1.0 - p);
}

}  // namespace clir
