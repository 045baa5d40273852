#pragma once

#include <cstdint>
#include <string>

namespace clir {

// Flat pipeline settings. Loadable from `key=value` files (full-line `#`
// comments allowed), with later sources overriding earlier ones; unknown
// keys and unparsable values raise ConfigError naming the key.
struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string stopwords_path;  // empty selects the built-in list
  std::int64_t min_freq = 1;
  std::int64_t neg_per_pos = 2;
  double dev_fraction = 0.1;

  std::int64_t em_iterations = 5;
  double em_tol = 1e-4;
  bool em_use_null = true;
  double em_prune_min_prob = 1e-3;

  std::string model_kind = "cross_encoder";
  std::int64_t embed_dim = 32;
  std::int64_t num_layers = 2;
  std::int64_t num_heads = 2;
  std::int64_t ffn_dim = 64;
  std::int64_t max_seq_len = 32;

  double lr = 1e-3;
  std::int64_t batch_size = 32;
  std::int64_t epochs = 3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;

  double alpha = 0.3;   // generative model mixture weight
  double beta = 40.0;   // false-alarm weight
  std::string threshold = "0.5";  // detection threshold, a number or "optimal"

  // set a single key from its text form; context prefixes error messages
  void apply(const std::string& key, const std::string& value,
             const std::string& context);
  void validate() const;

  bool threshold_is_optimal() const { return threshold == "optimal"; }
  double threshold_value() const;  // throws when threshold is "optimal"

  // canonical sorted key=value rendering; parses back to an identical config
  std::string echo() const;
};

PipelineConfig load_config(const std::string& path);
void save_config_echo(const PipelineConfig& config, const std::string& path);

}  // namespace clir
