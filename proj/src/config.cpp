#include "clir/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "clir/error.hpp"

namespace clir {

namespace {

std::string format_f64(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::int64_t parse_i64(const std::string& key, const std::string& value,
                       const std::string& context) {
  try {
    std::size_t used = 0;
    std::int64_t v = std::stoll(value, &used);
    if (used == value.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(context + ": key " + key + " expects an integer, got \"" + value + "\"");
}

std::uint64_t parse_u64(const std::string& key, const std::string& value,
                        const std::string& context) {
  try {
    std::size_t used = 0;
    if (!value.empty() && value[0] != '-') {
      std::uint64_t v = std::stoull(value, &used);
      if (used == value.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError(context + ": key " + key + " expects a non-negative integer, got \"" +
                    value + "\"");
}

double parse_f64(const std::string& key, const std::string& value,
                 const std::string& context) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used == value.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(context + ": key " + key + " expects a number, got \"" + value + "\"");
}

bool parse_bool(const std::string& key, const std::string& value,
                const std::string& context) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(context + ": key " + key + " expects true or false, got \"" + value +
                    "\"");
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

void PipelineConfig::apply(const std::string& key, const std::string& value,
                           const std::string& context) {
  if (key == "seed") seed = parse_u64(key, value, context);
  else if (key == "stopwords_path") stopwords_path = value;
  else if (key == "min_freq") min_freq = parse_i64(key, value, context);
  else if (key == "neg_per_pos") neg_per_pos = parse_i64(key, value, context);
  else if (key == "dev_fraction") dev_fraction = parse_f64(key, value, context);
  else if (key == "em_iterations") em_iterations = parse_i64(key, value, context);
  else if (key == "em_tol") em_tol = parse_f64(key, value, context);
  else if (key == "em_use_null") em_use_null = parse_bool(key, value, context);
  else if (key == "em_prune_min_prob") em_prune_min_prob = parse_f64(key, value, context);
  else if (key == "model_kind") model_kind = value;
  else if (key == "embed_dim") embed_dim = parse_i64(key, value, context);
  else if (key == "num_layers") num_layers = parse_i64(key, value, context);
  else if (key == "num_heads") num_heads = parse_i64(key, value, context);
  else if (key == "ffn_dim") ffn_dim = parse_i64(key, value, context);
  else if (key == "max_seq_len") max_seq_len = parse_i64(key, value, context);
  else if (key == "lr") lr = parse_f64(key, value, context);
  else if (key == "batch_size") batch_size = parse_i64(key, value, context);
  else if (key == "epochs") epochs = parse_i64(key, value, context);
  else if (key == "adam_beta1") adam_beta1 = parse_f64(key, value, context);
  else if (key == "adam_beta2") adam_beta2 = parse_f64(key, value, context);
  else if (key == "adam_eps") adam_eps = parse_f64(key, value, context);
  else if (key == "weight_decay") weight_decay = parse_f64(key, value, context);
  else if (key == "alpha") alpha = parse_f64(key, value, context);
  else if (key == "beta") beta = parse_f64(key, value, context);
  else if (key == "threshold") threshold = value;
  else throw ConfigError(context + ": unknown key " + key);
}

void PipelineConfig::validate() const {
  const std::string c = "config";
  if (min_freq < 1) throw ConfigError(c + ": min_freq must be at least 1");
  if (neg_per_pos < 0) throw ConfigError(c + ": neg_per_pos must not be negative");
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0))
    throw ConfigError(c + ": dev_fraction must lie in [0, 1)");
  if (em_iterations < 1) throw ConfigError(c + ": em_iterations must be positive");
  if (!(em_tol >= 0.0)) throw ConfigError(c + ": em_tol must not be negative");
  if (!(em_prune_min_prob >= 0.0 && em_prune_min_prob < 1.0))
    throw ConfigError(c + ": em_prune_min_prob must lie in [0, 1)");
  if (model_kind != "cross_encoder" && model_kind != "dot_product" && model_kind != "qrann")
    throw ConfigError(c + ": model_kind must be cross_encoder, dot_product or qrann");
  if (embed_dim < 1) throw ConfigError(c + ": embed_dim must be positive");
  if (num_layers < 0) throw ConfigError(c + ": num_layers must not be negative");
  if (num_heads < 1) throw ConfigError(c + ": num_heads must be positive");
  if (embed_dim % num_heads != 0)
    throw ConfigError(c + ": embed_dim must be divisible by num_heads");
  if (ffn_dim < 1) throw ConfigError(c + ": ffn_dim must be positive");
  if (max_seq_len < 5) throw ConfigError(c + ": max_seq_len must be at least 5");
  if (!(lr >= 0.0)) throw ConfigError(c + ": lr must not be negative");
  if (batch_size < 1) throw ConfigError(c + ": batch_size must be positive");
  if (epochs < 0) throw ConfigError(c + ": epochs must not be negative");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0))
    throw ConfigError(c + ": adam_beta1 must lie in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw ConfigError(c + ": adam_beta2 must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw ConfigError(c + ": adam_eps must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError(c + ": weight_decay must not be negative");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError(c + ": alpha must lie in [0, 1]");
  if (!(beta > 0.0)) throw ConfigError(c + ": beta must be positive");
  if (!threshold_is_optimal()) threshold_value();
}

double PipelineConfig::threshold_value() const {
  if (threshold_is_optimal())
    throw ConfigError("config: threshold is \"optimal\", not a number");
  return parse_f64("threshold", threshold, "config");
}

std::string PipelineConfig::echo() const {
  std::map<std::string, std::string> kv;
  kv["seed"] = std::to_string(seed);
  kv["stopwords_path"] = stopwords_path;
  kv["min_freq"] = std::to_string(min_freq);
  kv["neg_per_pos"] = std::to_string(neg_per_pos);
  kv["dev_fraction"] = format_f64(dev_fraction);
  kv["em_iterations"] = std::to_string(em_iterations);
  kv["em_tol"] = format_f64(em_tol);
  kv["em_use_null"] = em_use_null ? "true" : "false";
  kv["em_prune_min_prob"] = format_f64(em_prune_min_prob);
  kv["model_kind"] = model_kind;
  kv["embed_dim"] = std::to_string(embed_dim);
  kv["num_layers"] = std::to_string(num_layers);
  kv["num_heads"] = std::to_string(num_heads);
  kv["ffn_dim"] = std::to_string(ffn_dim);
  kv["max_seq_len"] = std::to_string(max_seq_len);
  kv["lr"] = format_f64(lr);
  kv["batch_size"] = std::to_string(batch_size);
  kv["epochs"] = std::to_string(epochs);
  kv["adam_beta1"] = format_f64(adam_beta1);
  kv["adam_beta2"] = format_f64(adam_beta2);
  kv["adam_eps"] = format_f64(adam_eps);
  kv["weight_decay"] = format_f64(weight_decay);
  kv["alpha"] = format_f64(alpha);
  kv["beta"] = format_f64(beta);
  kv["threshold"] = threshold;

  std::string out = "# resolved configuration\n";
  out += "# seed fan-out: sampling=" + std::to_string(seed) +
         " split=" + std::to_string(seed + 1) + " model=" + std::to_string(seed) +
         " shuffle=" + std::to_string(seed + 1) + "\n";
  for (const auto& [key, value] : kv) out += key + "=" + value + "\n";
  return out;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  PipelineConfig cfg;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    const std::string context = path + ": line " + std::to_string(lineno);
    if (eq == std::string::npos)
      throw ConfigError(context + ": expected key=value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ConfigError(context + ": empty key");
    cfg.apply(key, value, context);
  }
  return cfg;
}

void save_config_echo(const PipelineConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << config.echo();
  if (!out) throw IoError("failed while writing " + path);
}

}  // namespace clir
