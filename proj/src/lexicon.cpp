#include "clir/lexicon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "clir/error.hpp"

namespace clir {

double TranslationTable::lookup(const std::string& f, const std::string& e) const {
  const auto row = rows_.find(f);
  if (row == rows_.end()) return 0.0;
  const auto it = row->second.find(e);
  return it == row->second.end() ? 0.0 : it->second;
}

void TranslationTable::set(const std::string& f, const std::string& e, double p) {
  rows_[f][e] = p;
}

namespace {

// Token interner assigning dense ids in first-occurrence (corpus) order.
class Interner {
 public:
  std::int32_t id(const std::string& token) {
    const auto [it, inserted] =
        index_.emplace(token, static_cast<std::int32_t>(tokens_.size()));
    if (inserted) tokens_.push_back(token);
    return it->second;
  }
  const std::string& token(std::int32_t id) const { return tokens_[id]; }
  std::size_t size() const { return tokens_.size(); }

 private:
  std::unordered_map<std::string, std::int32_t> index_;
  std::vector<std::string> tokens_;
};

}  // namespace

Model1Result train_model1(const std::vector<BitextPair>& pairs,
                          const Model1Options& options) {
  if (pairs.empty()) throw Error("cannot train translation table on empty corpus");
  if (options.iterations < 1) throw Error("iterations must be >= 1");

  Interner foreign, english;
  const std::int32_t null_id = options.use_null ? foreign.id(kNullToken) : -1;

  // Integer-encoded corpus; the NULL token (if any) is prepended to each
  // foreign side.
  std::vector<std::vector<std::int32_t>> fsents(pairs.size()), esents(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (options.use_null) fsents[p].push_back(null_id);
    for (const auto& t : pairs[p].foreign) fsents[p].push_back(foreign.id(t));
    for (const auto& t : pairs[p].english) esents[p].push_back(english.id(t));
  }
  const std::size_t nf = foreign.size();

  // t[f] maps english id -> p(e|f); initialized uniform over co-occurring e.
  std::vector<std::unordered_map<std::int32_t, double>> t(nf);
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (const std::int32_t f : fsents[p])
      for (const std::int32_t e : esents[p]) t[f][e] = 1.0;
  for (auto& row : t) {
    const double u = 1.0 / static_cast<double>(row.size());
    for (auto& [e, prob] : row) prob = u;
  }

  std::vector<double> log_likelihood;
  std::vector<std::unordered_map<std::int32_t, double>> counts(nf);
  std::vector<double> totals(nf);

  for (std::int64_t iter = 0; iter < options.iterations; ++iter) {
    for (auto& row : counts) row.clear();
    std::fill(totals.begin(), totals.end(), 0.0);
    double ll = 0.0;

    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto& fs = fsents[p];
      const auto& es = esents[p];
      const double log_prior = -std::log(static_cast<double>(fs.size()));
      for (const std::int32_t e : es) {
        double denom = 0.0;
        for (const std::int32_t f : fs) denom += t[f].at(e);
        ll += std::log(denom) + log_prior;
        for (const std::int32_t f : fs) {
          const double c = t[f].at(e) / denom;
          counts[f][e] += c;
          totals[f] += c;
        }
      }
    }
    log_likelihood.push_back(ll);

    for (std::size_t f = 0; f < nf; ++f) {
      auto& row = t[f];
      for (auto& [e, prob] : row) prob = counts[f][e] / totals[f];
    }

    if (log_likelihood.size() >= 2 &&
        ll - log_likelihood[log_likelihood.size() - 2] < options.tol)
      break;
  }

  Model1Result result;
  result.table.trained_iterations =
      static_cast<std::int64_t>(log_likelihood.size());
  result.table.final_log_likelihood = log_likelihood.back();
  for (std::size_t f = 0; f < nf; ++f)
    for (const auto& [e, prob] : t[f])
      result.table.set(foreign.token(static_cast<std::int32_t>(f)),
                       english.token(e), prob);
  result.log_likelihood = std::move(log_likelihood);
  return result;
}

TranslationTable prune(const TranslationTable& table, double min_prob) {
  if (!(min_prob >= 0.0 && min_prob < 1.0))
    throw Error("min_prob must be in [0, 1)");
  TranslationTable pruned;
  pruned.trained_iterations = table.trained_iterations;
  pruned.final_log_likelihood = table.final_log_likelihood;
  for (const auto& [f, row] : table.rows())
    for (const auto& [e, p] : row)
      if (p >= min_prob) pruned.set(f, e, p);
  return pruned;
}

void save_table(const TranslationTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");

  std::vector<std::string> foreign_tokens;
  foreign_tokens.reserve(table.rows().size());
  for (const auto& [f, row] : table.rows())
    if (f != kNullToken) foreign_tokens.push_back(f);
  std::sort(foreign_tokens.begin(), foreign_tokens.end());

  char buf[64];
  for (const auto& f : foreign_tokens) {
    const auto& row = table.rows().at(f);
    std::vector<std::pair<std::string, double>> entries(row.begin(), row.end());
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    for (const auto& [e, p] : entries) {
      std::snprintf(buf, sizeof(buf), "%.17g", p);
      out << f << '\t' << e << '\t' << buf << '\n';
    }
  }
}

TranslationTable load_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  TranslationTable table;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t t1 = line.find('\t');
    const std::size_t t2 = t1 == std::string::npos ? std::string::npos
                                                   : line.find('\t', t1 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos ||
        line.find('\t', t2 + 1) != std::string::npos)
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": expected foreign<TAB>english<TAB>probability");
    const std::string f = line.substr(0, t1);
    const std::string e = line.substr(t1 + 1, t2 - t1 - 1);
    double p = 0.0;
    try {
      p = std::stod(line.substr(t2 + 1));
    } catch (const std::exception&) {
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": bad probability");
    }
    if (!(p >= 0.0 && p <= 1.0))
      throw ParseError(path + ": line " + std::to_string(lineno) +
                       ": probability outside [0, 1]");
    table.set(f, e, p);
  }
  return table;
}

}  // namespace clir
