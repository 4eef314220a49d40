#include "scpt/align_ref.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "scpt/rng.hpp"

namespace scpt {

TokenPolicy::TokenPolicy(int vocab_size, int context_order)
    : vocab_size_(vocab_size), order_(context_order) {
  if (vocab_size < 2 || vocab_size > 16) {
    throw Error("vocab size must be in [2, 16]");
  }
  if (context_order < 1 || context_order > 4) {
    throw Error("context order must be in [1, 4]");
  }
  context_count_ = 1;
  for (int i = 1; i < order_; ++i) context_count_ *= vocab_size_ + 1;
  logits_.assign(static_cast<size_t>(context_count_) *
                     static_cast<size_t>(emission_count()),
                 0.0);
}

TokenPolicy TokenPolicy::random(int vocab_size, int context_order, double scale,
                                uint64_t seed) {
  TokenPolicy policy(vocab_size, context_order);
  Rng rng(seed);
  for (double &logit : policy.logits_) {
    logit = (rng.unit() * 2.0 - 1.0) * scale;
  }
  return policy;
}

int TokenPolicy::context_index(const std::vector<int> &window) const {
  int index = 0;
  for (int symbol : window) {
    index = index * (vocab_size_ + 1) + symbol;
  }
  return index;
}

std::vector<double> TokenPolicy::log_softmax(int context) const {
  const int width = emission_count();
  std::vector<double> out(static_cast<size_t>(width));
  const double *row =
      logits_.data() + static_cast<size_t>(context) * static_cast<size_t>(width);
  double max_logit = row[0];
  for (int k = 1; k < width; ++k) max_logit = std::max(max_logit, row[k]);
  double total = 0.0;
  for (int k = 0; k < width; ++k) total += std::exp(row[k] - max_logit);
  const double lse = max_logit + std::log(total);
  for (int k = 0; k < width; ++k) out[static_cast<size_t>(k)] = row[k] - lse;
  return out;
}

double TokenPolicy::max_normalization_error() const {
  double worst = 0.0;
  for (int c = 0; c < context_count_; ++c) {
    const auto lsm = log_softmax(c);
    double total = 0.0;
    for (double v : lsm) total += std::exp(v);
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return worst;
}

namespace {

// Walks the scored positions of (x, y, END): calls visit(context, emission)
// for each y token and the end token.
template <typename Visit>
void walk_sequence(const TokenPolicy &policy, const std::vector<int> &x,
                   const std::vector<int> &y, Visit &&visit) {
  const int window_size = policy.context_order() - 1;
  std::vector<int> window(static_cast<size_t>(window_size),
                          policy.begin_symbol());
  auto push = [&](int symbol) {
    if (window_size == 0) return;
    window.erase(window.begin());
    window.push_back(symbol);
  };
  for (int token : x) push(token);
  for (int token : y) {
    visit(policy.context_index(window), token);
    push(token);
  }
  visit(policy.context_index(window), policy.end_token());
}

// Per-call memo of log-softmax rows; batch losses revisit few contexts many
// times.
class SoftmaxCache {
 public:
  explicit SoftmaxCache(const TokenPolicy &policy)
      : policy_(policy), rows_(static_cast<size_t>(policy.context_count())) {}
  const std::vector<double> &row(int context) {
    auto &slot = rows_[static_cast<size_t>(context)];
    if (slot.empty()) slot = policy_.log_softmax(context);
    return slot;
  }

 private:
  const TokenPolicy &policy_;
  std::vector<std::vector<double>> rows_;
};

double seq_logprob_cached(const TokenPolicy &policy, SoftmaxCache &cache,
                          const std::vector<int> &x, const std::vector<int> &y) {
  double total = 0.0;
  walk_sequence(policy, x, y, [&](int context, int emission) {
    total += cache.row(context)[static_cast<size_t>(emission)];
  });
  return total;
}

}  // namespace

double seq_logprob(const TokenPolicy &policy, const std::vector<int> &x,
                   const std::vector<int> &y) {
  SoftmaxCache cache(policy);
  return seq_logprob_cached(policy, cache, x, y);
}

double sft_loss(const TokenPolicy &policy, const std::vector<SftExample> &batch) {
  if (batch.empty()) throw EmptyBatch("empty SFT batch");
  SoftmaxCache cache(policy);
  double total = 0.0;
  for (const SftExample &example : batch) {
    total -= seq_logprob_cached(policy, cache, example.x, example.y);
  }
  return total / static_cast<double>(batch.size());
}

namespace {

// Adds scale * d(log p(y|x))/d(logits) into grad.
void accumulate_logprob_grad(const TokenPolicy &policy, SoftmaxCache &cache,
                             const std::vector<int> &x, const std::vector<int> &y,
                             double scale, std::vector<double> &grad) {
  const int width = policy.emission_count();
  walk_sequence(policy, x, y, [&](int context, int emission) {
    const auto &lsm = cache.row(context);
    double *row =
        grad.data() + static_cast<size_t>(context) * static_cast<size_t>(width);
    for (int k = 0; k < width; ++k) {
      const double indicator = (k == emission) ? 1.0 : 0.0;
      row[k] += scale * (indicator - std::exp(lsm[static_cast<size_t>(k)]));
    }
  });
}

double dpo_margin_cached(const TokenPolicy &policy, SoftmaxCache &cache,
                         const PrefExample &record, MarginMode mode,
                         const TokenPolicy *reference, SoftmaxCache *ref_cache) {
  if (record.y_w == record.y_l) {
    throw Error("preference record with identical sequences");
  }
  double margin = seq_logprob_cached(policy, cache, record.x, record.y_w) -
                  seq_logprob_cached(policy, cache, record.x, record.y_l);
  if (mode == MarginMode::kReferenceNormalized) {
    if (reference == nullptr || ref_cache == nullptr) {
      throw Error("reference-normalized margin needs a reference policy");
    }
    margin -=
        seq_logprob_cached(*reference, *ref_cache, record.x, record.y_w) -
        seq_logprob_cached(*reference, *ref_cache, record.x, record.y_l);
  }
  return margin;
}

}  // namespace

std::vector<double> sft_loss_grad(const TokenPolicy &policy,
                                  const std::vector<SftExample> &batch) {
  if (batch.empty()) throw EmptyBatch("empty SFT batch");
  SoftmaxCache cache(policy);
  std::vector<double> grad(policy.table().size(), 0.0);
  const double scale = -1.0 / static_cast<double>(batch.size());
  for (const SftExample &example : batch) {
    accumulate_logprob_grad(policy, cache, example.x, example.y, scale, grad);
  }
  return grad;
}

double dpo_margin(const TokenPolicy &policy, const PrefExample &record,
                  MarginMode mode, const TokenPolicy *reference) {
  SoftmaxCache cache(policy);
  if (reference != nullptr) {
    SoftmaxCache ref_cache(*reference);
    return dpo_margin_cached(policy, cache, record, mode, reference, &ref_cache);
  }
  return dpo_margin_cached(policy, cache, record, mode, nullptr, nullptr);
}

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// -log sigmoid(z), stable for large |z|.
double softplus_neg(double z) {
  if (z > 0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

}  // namespace

double dpo_loss(const TokenPolicy &policy, const PrefBatch &batch,
                MarginMode mode, const TokenPolicy *reference) {
  if (batch.records.empty()) throw EmptyBatch("empty preference batch");
  if (batch.beta <= 0) throw Error("beta must be positive");
  SoftmaxCache cache(policy);
  SoftmaxCache ref_cache(reference != nullptr ? *reference : policy);
  double total = 0.0;
  for (const PrefExample &record : batch.records) {
    const double margin =
        dpo_margin_cached(policy, cache, record, mode, reference,
                          reference != nullptr ? &ref_cache : nullptr);
    total += softplus_neg(batch.beta * margin);
  }
  return total / static_cast<double>(batch.records.size());
}

std::vector<double> dpo_loss_grad(const TokenPolicy &policy,
                                  const PrefBatch &batch, MarginMode mode,
                                  const TokenPolicy *reference) {
  if (batch.records.empty()) throw EmptyBatch("empty preference batch");
  std::vector<double> grad(policy.table().size(), 0.0);
  SoftmaxCache cache(policy);
  SoftmaxCache ref_cache(reference != nullptr ? *reference : policy);
  const double inv = 1.0 / static_cast<double>(batch.records.size());
  for (const PrefExample &record : batch.records) {
    const double margin =
        dpo_margin_cached(policy, cache, record, mode, reference,
                          reference != nullptr ? &ref_cache : nullptr);
    // d/dm of -log sigmoid(beta m) = -beta * sigmoid(-beta m).
    const double dm = -batch.beta * logistic(-batch.beta * margin) * inv;
    accumulate_logprob_grad(policy, cache, record.x, record.y_w, dm, grad);
    accumulate_logprob_grad(policy, cache, record.x, record.y_l, -dm, grad);
  }
  return grad;
}

TrainResult train(TokenPolicy policy, const std::vector<SftExample> &sft_batch,
                  const PrefBatch &pref_batch, int steps, double lr,
                  MarginMode mode, uint64_t seed) {
  (void)seed;  // full-batch descent has no sampling; kept for interface parity
  TrainResult result{std::move(policy), {}};
  if (steps < 0) throw Error("steps must be >= 0");

  auto mean_margin = [&](const TokenPolicy &p,
                         const TokenPolicy *reference) -> double {
    if (pref_batch.records.empty()) return 0.0;
    // Before the DPO stage fixes a reference, report the as-written margin.
    const MarginMode effective =
        reference != nullptr ? mode : MarginMode::kAsWritten;
    SoftmaxCache cache(p);
    SoftmaxCache ref_cache(reference != nullptr ? *reference : p);
    double total = 0.0;
    for (const PrefExample &record : pref_batch.records) {
      total += dpo_margin_cached(p, cache, record, effective, reference,
                                 reference != nullptr ? &ref_cache : nullptr);
    }
    return total / static_cast<double>(pref_batch.records.size());
  };

  auto check_finite = [](double loss) {
    if (!std::isfinite(loss)) {
      throw DivergenceDetected("training loss became non-finite");
    }
  };

  if (!sft_batch.empty() && steps > 0) {
    for (int step = 0; step < steps; ++step) {
      const double loss = sft_loss(result.policy, sft_batch);
      check_finite(loss);
      result.history.push_back({step, "sft", loss, mean_margin(result.policy, nullptr)});
      const auto grad = sft_loss_grad(result.policy, sft_batch);
      auto &table = result.policy.table();
      for (size_t i = 0; i < table.size(); ++i) table[i] -= lr * grad[i];
    }
    const double loss = sft_loss(result.policy, sft_batch);
    check_finite(loss);
    result.history.push_back({steps, "sft", loss, mean_margin(result.policy, nullptr)});
  }

  if (!pref_batch.records.empty() && steps > 0) {
    // The frozen reference is the policy entering the DPO stage.
    const TokenPolicy reference = result.policy;
    const TokenPolicy *ref_ptr =
        mode == MarginMode::kReferenceNormalized ? &reference : nullptr;
    for (int step = 0; step < steps; ++step) {
      const double loss = dpo_loss(result.policy, pref_batch, mode, ref_ptr);
      check_finite(loss);
      result.history.push_back(
          {step, "dpo", loss, mean_margin(result.policy, ref_ptr)});
      const auto grad = dpo_loss_grad(result.policy, pref_batch, mode, ref_ptr);
      auto &table = result.policy.table();
      for (size_t i = 0; i < table.size(); ++i) table[i] -= lr * grad[i];
    }
    const double loss = dpo_loss(result.policy, pref_batch, mode, ref_ptr);
    check_finite(loss);
    result.history.push_back(
        {steps, "dpo", loss, mean_margin(result.policy, ref_ptr)});
  }
  return result;
}

PrefDataset load_pref_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open preference file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty preference file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  PrefDataset dataset;
  {
    std::istringstream header(line);
    std::string tag;
    std::getline(header, tag, '\t');
    if (tag != "alphabet") {
      throw IoError(path + ":1: expected 'alphabet<TAB>tok tok ...'");
    }
    std::string rest;
    std::getline(header, rest);
    std::istringstream tokens(rest);
    std::string token;
    while (tokens >> token) dataset.alphabet.push_back(token);
  }
  if (dataset.alphabet.size() < 2) {
    throw IoError(path + ":1: alphabet needs at least two tokens");
  }

  auto decode = [&](const std::string &field, size_t line_no) {
    std::vector<int> out;
    std::istringstream tokens(field);
    std::string token;
    while (tokens >> token) {
      const auto it = std::find(dataset.alphabet.begin(), dataset.alphabet.end(), token);
      if (it == dataset.alphabet.end()) {
        throw IoError(path + ":" + std::to_string(line_no) + ": unknown token '" +
                      token + "'");
      }
      out.push_back(static_cast<int>(it - dataset.alphabet.begin()));
    }
    return out;
  };

  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string x, yw, yl;
    std::getline(fields, x, '\t');
    if (!std::getline(fields, yw, '\t') || !std::getline(fields, yl, '\t')) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": expected x<TAB>y_w<TAB>y_l");
    }
    PrefExample record;
    record.x = decode(x, line_no);
    record.y_w = decode(yw, line_no);
    record.y_l = decode(yl, line_no);
    if (record.y_w == record.y_l) {
      throw IoError(path + ":" + std::to_string(line_no) +
                    ": preferred and rejected sequences are identical");
    }
    dataset.batch.records.push_back(std::move(record));
  }
  return dataset;
}

void write_history_tsv(const std::string &path,
                       const std::vector<TrainStep> &history) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "step\tstage\tloss\tmean_margin\n";
  char buffer[128];
  for (const TrainStep &step : history) {
    std::snprintf(buffer, sizeof(buffer), "%d\t%s\t%.9f\t%.9f\n", step.step,
                  step.stage.c_str(), step.loss, step.mean_margin);
    out << buffer;
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace scpt
