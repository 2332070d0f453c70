#include "ide/trainer.hpp"

#include <cmath>
#include <sstream>

namespace ide {

void TrainConfig::validate() const {
  if (learning_rate < 0.0) throw ContractError("TrainConfig: negative learning_rate");
  if (iterations < 0) throw ContractError("TrainConfig: negative iterations");
  if (persons_per_batch < 2 || sets_per_person < 1 || items_per_set < 1) {
    throw ContractError("TrainConfig: degenerate batch geometry");
  }
  attention.validate();
  loss.validate();
}

Trainer::Trainer(Model& model, TrainConfig config)
    : model_(model), cfg_(std::move(config)), sampler_rng_(cfg_.seed) {
  cfg_.validate();
}

StepResult Trainer::forward_losses(const MiniBatch& batch, NodePtr* joint_out) {
  BatchForward fwd = model_.embed_batch(batch);

  std::vector<NodePtr> confidences;
  std::vector<double> fla_weights;
  StepResult result;
  confidences.reserve(fwd.logits.size());
  for (std::size_t i = 0; i < fwd.logits.size(); ++i) {
    NodePtr probs = softmax(fwd.logits[i]);
    NodePtr s = pick(probs, fwd.labels[i]);
    confidences.push_back(s);

    QualityRecord q;
    q.s = s->scalar();
    q.fla = fla_score(q.s, cfg_.attention.sigma_fla, cfg_.attention.denominator);
    q.ffa = ffa_score(q.s, cfg_.attention.sigma_ffa, cfg_.attention.denominator);
    result.qualities.push_back(q);
    fla_weights.push_back(cfg_.ce_mode == CeMode::kFlaWeighted ? q.fla : 1.0);
  }

  NodePtr wcel = weighted_cross_entropy(confidences, fla_weights);

  std::vector<NodePtr> set_embs;
  std::vector<int> set_labels;
  for (std::size_t s = 0; s < fwd.set_offsets.size(); ++s) {
    std::size_t begin = fwd.set_offsets[s], n = fwd.set_sizes[s];
    std::vector<NodePtr> embs(fwd.embeddings.begin() + begin,
                              fwd.embeddings.begin() + begin + n);
    std::vector<double> weights(n);
    for (std::size_t i = 0; i < n; ++i) {
      weights[i] = fusion_weight(result.qualities[begin + i].s, cfg_.attention);
    }
    set_embs.push_back(fuse_set(embs, weights, &fuse_stats_));
    set_labels.push_back(batch.sets[s].label);
  }
  NodePtr cl = batch_contrastive(set_embs, set_labels, cfg_.loss.margin);
  NodePtr joint = joint_loss(wcel, cl, cfg_.loss.wcel_weight, cfg_.loss.cl_weight);

  result.wcel = wcel->scalar();
  result.cl = cl->scalar();
  result.total = joint->scalar();
  if (!std::isfinite(result.total)) {
    std::ostringstream diag;
    diag << "non-finite loss: wcel=" << result.wcel << " cl=" << result.cl;
    for (std::size_t i = 0; i < result.qualities.size(); ++i) {
      diag << "\n  item " << i << " s=" << result.qualities[i].s;
    }
    throw NumericError(diag.str());
  }
  if (joint_out) *joint_out = joint;
  return result;
}

StepResult Trainer::compute_losses(const MiniBatch& batch) {
  return forward_losses(batch, nullptr);
}

StepResult Trainer::train_step(const MiniBatch& batch) {
  NodePtr joint;
  StepResult result = forward_losses(batch, &joint);
  model_.params().zero_grads();
  backward(joint);
  model_.params().sgd_step(cfg_.learning_rate);
  return result;
}

void Trainer::run(const std::vector<SetSample>& pool, std::ostream* losses_csv,
                  std::ostream* attention_csv, int start_iteration) {
  for (int it = 0; it < cfg_.iterations; ++it) {
    MiniBatch batch = sample_minibatch(pool, cfg_.persons_per_batch,
                                       cfg_.sets_per_person, cfg_.items_per_set,
                                       sampler_rng_);
    StepResult step = train_step(batch);
    int iteration = start_iteration + it;
    if (losses_csv) {
      (*losses_csv) << iteration << ',' << step.wcel << ',' << step.cl << ','
                    << step.total << '\n';
    }
    if (attention_csv) {
      for (std::size_t i = 0; i < step.qualities.size(); ++i) {
        const auto& q = step.qualities[i];
        (*attention_csv) << iteration << ',' << i << ',' << q.s << ',' << q.fla
                         << ',' << q.ffa << '\n';
      }
    }
  }
}

}  // namespace ide
