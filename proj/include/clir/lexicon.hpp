#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "clir/corpus.hpp"

namespace clir {

// Pseudo source token that can absorb English words with no counterpart.
// Kept in the in-memory table but excluded from the wire format.
inline constexpr const char* kNullToken = "<NULL>";

// Per-foreign-token probability distribution p(e|f) over English tokens.
// Before pruning each row sums to 1; lookups of absent pairs return 0.
class TranslationTable {
 public:
  double lookup(const std::string& f, const std::string& e) const;
  void set(const std::string& f, const std::string& e, double p);

  const std::unordered_map<std::string, std::unordered_map<std::string, double>>&
  rows() const {
    return rows_;
  }

  std::int64_t trained_iterations = 0;
  double final_log_likelihood = 0.0;

 private:
  std::unordered_map<std::string, std::unordered_map<std::string, double>> rows_;
};

struct Model1Options {
  std::int64_t iterations = 5;
  double tol = 1e-4;
  bool use_null = true;
};

struct Model1Result {
  TranslationTable table;
  std::vector<double> log_likelihood;  // one entry per completed EM iteration
};

// IBM Model 1 EM in the foreign->english direction. Initialization is uniform
// over co-occurring pairs; expected counts are accumulated in corpus order so
// identical corpora yield bitwise-identical tables. Stops after `iterations`
// or once the log-likelihood improvement drops below `tol`. The reported
// per-iteration log-likelihood (up to the constant alignment prior) is
// non-decreasing.
Model1Result train_model1(const std::vector<BitextPair>& pairs,
                          const Model1Options& options = {});

// Removes entries below min_prob; remaining probabilities are unchanged.
TranslationTable prune(const TranslationTable& table, double min_prob);

// Wire format: `foreign<TAB>english<TAB>probability` with 17 significant
// digits, sorted by (foreign, descending probability, english). The <NULL>
// row is not written.
void save_table(const TranslationTable& table, const std::string& path);
TranslationTable load_table(const std::string& path);

}  // namespace clir
