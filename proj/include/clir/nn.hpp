#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clir/autograd.hpp"
#include "clir/corpus.hpp"

namespace clir {

enum class ModelKind { cross_encoder, dot_product, qrann };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// Reserved ids at the bottom of the joint id space. English vocabulary ids
// follow, then foreign ids.
struct SpecialTokens {
  static constexpr std::int64_t pad = 0;
  static constexpr std::int64_t unk = 1;
  static constexpr std::int64_t cls = 2;
  static constexpr std::int64_t sep = 3;
  static constexpr std::int64_t count = 4;
};

struct ModelConfig {
  ModelKind kind = ModelKind::cross_encoder;
  std::int64_t english_vocab = 0;
  std::int64_t foreign_vocab = 0;
  std::int64_t embed_dim = 32;
  std::int64_t num_layers = 2;
  std::int64_t num_heads = 2;
  std::int64_t ffn_dim = 64;
  std::int64_t max_seq_len = 32;
  std::uint64_t seed = 0;

  std::int64_t total_vocab() const {
    return SpecialTokens::count + english_vocab + foreign_vocab;
  }
  std::int64_t head_dim() const { return embed_dim / num_heads; }
  // longest sentence that fits the [CLS] q [SEP] s [SEP] layout
  std::int64_t sentence_capacity() const { return max_seq_len - 4; }

  void validate() const;
  std::string to_json() const;  // fixed key order, round-trips exactly
  static ModelConfig from_json(const std::string& text);
};

// Fixed-length encoder input. Arrays always span max_seq_len; positions
// past real_len are PAD filler that the forward pass never reads.
struct PackedInput {
  std::vector<std::int64_t> tokens;
  std::vector<std::int64_t> segments;
  std::vector<std::int64_t> positions;
  std::vector<std::int64_t> mask;  // 1 on real positions, 0 on PAD
  std::int64_t real_len = 0;
};

PackedInput pack_input(std::int64_t query_id, std::span<const std::int64_t> sentence_ids,
                       const ModelConfig& config);

struct EncodedSample {
  std::int64_t query = 0;
  std::vector<std::int64_t> sentence;
  int label = 0;
};

// attention weights per [layer][head], each max_seq_len x max_seq_len with
// zeros on PAD rows and columns
using AttentionTrace = std::vector<std::vector<ag::Mat>>;

class Model {
 public:
  explicit Model(ModelConfig config);          // zero-valued parameters
  static Model init(const ModelConfig& config);  // seeded random draw

  const ModelConfig& config() const { return config_; }
  std::map<std::string, ag::Parameter>& params() { return params_; }
  const std::map<std::string, ag::Parameter>& params() const { return params_; }
  ag::Parameter& param(const std::string& name);
  const ag::Parameter& param(const std::string& name) const;

  void zero_grad();

  // builds the model graph on the tape and returns the 1x1 relevance logit
  ag::Var build_logit(ag::Tape& tape, std::int64_t query,
                      std::span<const std::int64_t> sentence,
                      AttentionTrace* trace = nullptr);

  // relevance probability, clamped to [1e-12, 1 - 1e-12]
  double score(std::int64_t query, std::span<const std::int64_t> sentence);

  AttentionTrace attention_trace(const PackedInput& input);

 private:
  ag::Var build_cross_encoder(ag::Tape& tape, const PackedInput& input,
                              AttentionTrace* trace);
  ag::Var build_context(ag::Tape& tape, std::int64_t query,
                        std::span<const std::int64_t> sentence, ag::Var& query_vec);

  ModelConfig config_;
  std::map<std::string, ag::Parameter> params_;
};

// bridges string tokens to joint ids; unknown tokens map to UNK
class TokenCodec {
 public:
  TokenCodec(const Vocabulary* english, const Vocabulary* foreign);

  std::int64_t encode_query(const std::string& term) const;
  std::vector<std::int64_t> encode_sentence(const TokenSeq& tokens) const;
  EncodedSample encode(const std::string& query_term, const TokenSeq& sentence,
                       int label) const;
  // display name for a joint id, used by attention dumps
  std::string token_name(std::int64_t id) const;

  std::int64_t english_size() const;
  std::int64_t foreign_size() const;

 private:
  const Vocabulary* english_;
  const Vocabulary* foreign_;
};

// binary cross-entropy on an already-squashed probability; inputs are
// clamped away from 0 and 1 by 1e-12 before taking logs
double bce_loss(double prediction, int label);

}  // namespace clir
