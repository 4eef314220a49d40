#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scpt/errors.hpp"

namespace scpt {

// Tabular n-gram softmax policy over a small token alphabet. Contexts are
// windows of the previous (order - 1) symbols, padded with a begin marker;
// each context row holds logits for every regular token plus the end token.
class TokenPolicy {
 public:
  TokenPolicy(int vocab_size, int context_order);
  static TokenPolicy random(int vocab_size, int context_order, double scale,
                            uint64_t seed);

  int vocab_size() const { return vocab_size_; }
  int context_order() const { return order_; }
  int end_token() const { return vocab_size_; }
  // Context symbols: regular tokens 0..V-1, begin marker V.
  int begin_symbol() const { return vocab_size_; }

  int context_count() const { return context_count_; }
  int emission_count() const { return vocab_size_ + 1; }

  // Mixed-radix index of a context window (most recent symbol last).
  int context_index(const std::vector<int> &window) const;

  double logit(int context, int emission) const {
    return logits_[static_cast<size_t>(context) * static_cast<size_t>(emission_count()) +
                   static_cast<size_t>(emission)];
  }
  std::vector<double> &table() { return logits_; }
  const std::vector<double> &table() const { return logits_; }

  std::vector<double> log_softmax(int context) const;

  // Largest |sum(softmax) - 1| across contexts.
  double max_normalization_error() const;

 private:
  int vocab_size_;
  int order_;
  int context_count_;
  std::vector<double> logits_;
};

struct SftExample {
  std::vector<int> x;
  std::vector<int> y;
};

struct PrefExample {
  std::vector<int> x;
  std::vector<int> y_w;
  std::vector<int> y_l;
};

struct PrefBatch {
  std::vector<PrefExample> records;
  double beta = 0.5;
};

enum class MarginMode { kAsWritten, kReferenceNormalized };

// Sum of per-token log-softmax values of y given context x, end token
// included.
double seq_logprob(const TokenPolicy &policy, const std::vector<int> &x,
                   const std::vector<int> &y);

// Mean next-token negative log-likelihood over the batch.
double sft_loss(const TokenPolicy &policy, const std::vector<SftExample> &batch);
std::vector<double> sft_loss_grad(const TokenPolicy &policy,
                                  const std::vector<SftExample> &batch);

// log pi(y_w|x) - log pi(y_l|x); the reference-normalized mode subtracts the
// same difference under the frozen reference policy.
double dpo_margin(const TokenPolicy &policy, const PrefExample &record,
                  MarginMode mode, const TokenPolicy *reference = nullptr);

// Mean over records of -log sigmoid(beta * margin).
double dpo_loss(const TokenPolicy &policy, const PrefBatch &batch,
                MarginMode mode, const TokenPolicy *reference = nullptr);
std::vector<double> dpo_loss_grad(const TokenPolicy &policy,
                                  const PrefBatch &batch, MarginMode mode,
                                  const TokenPolicy *reference = nullptr);

struct TrainStep {
  int step = 0;
  std::string stage;  // "sft" or "dpo"
  double loss = 0.0;
  double mean_margin = 0.0;
};

struct TrainResult {
  TokenPolicy policy;
  std::vector<TrainStep> history;
};

// Full-batch gradient descent: `steps` SFT steps on sft_batch (when
// non-empty), then `steps` DPO steps on pref_batch (when non-empty). The
// DPO reference is the policy state entering the DPO stage. History rows
// record loss and mean margin at every step, starting with the initial
// state of each stage. Throws DivergenceDetected on non-finite loss.
TrainResult train(TokenPolicy policy, const std::vector<SftExample> &sft_batch,
                  const PrefBatch &pref_batch, int steps, double lr,
                  MarginMode mode, uint64_t seed);

// Token-string dataset: first line "alphabet<TAB>tok tok ...", then records
// "x_tokens<TAB>y_w_tokens<TAB>y_l_tokens" with space-separated tokens.
struct PrefDataset {
  std::vector<std::string> alphabet;
  PrefBatch batch;
};
PrefDataset load_pref_file(const std::string &path);

// Training history TSV: step, stage, loss, mean_margin.
void write_history_tsv(const std::string &path,
                       const std::vector<TrainStep> &history);

}  // namespace scpt
