// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "gcrmf/autograd.hpp"
#include "gcrmf/errors.hpp"

namespace gcrmf {

enum class Augmentation { InstanceResample, EdgeDropout };

struct ContrastiveConfig {
    double tau = 0.2;
    int negatives_per_anchor = 63;
    Augmentation augmentation = Augmentation::InstanceResample;
    double dropout_rate = 0.1;

    void validate() const {
        if (tau <= 0.0) throw DomainError("contrastive: tau must be > 0");
        if (negatives_per_anchor < 1)
            throw DomainError("contrastive: need at least one negative per anchor");
        if (dropout_rate < 0.0 || dropout_rate >= 1.0)
            throw DomainError("contrastive: dropout rate must lie in [0,1)");
    }
};

struct LossWeights {
    double gamma_loss = 0.1; // temporal-smoothness weight
    double eta = 1.0;        // classification weight

    void validate() const {
        if (gamma_loss < 0.0 || eta < 0.0) throw DomainError("loss weights must be nonnegative");
    }
};

struct ContrastivePair {
    Var anchor;
    Var positive;
    std::vector<Var> negatives;
};

// Mean InfoNCE over anchors with cosine similarity:
//   -log( e^{s+/tau} / (e^{s+/tau} + sum_j e^{s-_j/tau}) )
inline Var contrastive_loss(Tape& tape, const std::vector<ContrastivePair>& pairs, double tau) {
    if (tau <= 0.0) throw DomainError("contrastive: tau must be > 0");
    if (pairs.empty()) throw BatchError("contrastive: empty pair set");
    std::vector<Var> per_anchor;
    per_anchor.reserve(pairs.size());
    for (const ContrastivePair& p : pairs) {
        if (p.negatives.empty())
            throw BatchError("contrastive: anchor without negatives");
        Var pos = tape.exp_op(tape.scale_const(tape.cosine_sim(p.anchor, p.positive), 1.0 / tau));
        std::vector<Var> denom{pos};
        for (Var n : p.negatives)
            denom.push_back(
                tape.exp_op(tape.scale_const(tape.cosine_sim(p.anchor, n), 1.0 / tau)));
        per_anchor.push_back(tape.sub(tape.log_op(tape.add_n(denom)), tape.log_op(pos)));
    }
    return tape.scale_const(tape.add_n(per_anchor), 1.0 / static_cast<double>(per_anchor.size()));
}

// Sum of squared drifts between aligned embedding lists.
inline Var temporal_loss(Tape& tape, const std::vector<Var>& current,
                         const std::vector<Var>& previous) {
    if (current.size() != previous.size())
        throw DimensionError("temporal loss: table sizes differ");
    if (current.empty()) return tape.scalar(0.0);
    std::vector<Var> terms;
    terms.reserve(current.size());
    for (std::size_t i = 0; i < current.size(); ++i)
        terms.push_back(tape.l2_norm_sq(tape.sub(current[i], previous[i])));
    return tape.add_n(terms);
}

// Mean binary cross-entropy over (probability, 0/1 target) pairs; empty
// input contributes nothing (callers log the skip).
inline Var classification_loss(Tape& tape, const std::vector<std::pair<Var, double>>& labeled) {
    if (labeled.empty()) return tape.scalar(0.0);
    std::vector<Var> terms;
    terms.reserve(labeled.size());
    for (const auto& [p, target] : labeled)
        terms.push_back(tape.binary_cross_entropy(p, target));
    return tape.scale_const(tape.add_n(terms), 1.0 / static_cast<double>(terms.size()));
}

inline Var total_loss(Tape& tape, Var l_struct, Var l_temp, Var l_cls, const LossWeights& w) {
    w.validate();
    const char* names[] = {"structural", "temporal", "classification"};
    const Var comps[] = {l_struct, l_temp, l_cls};
    for (int i = 0; i < 3; ++i) {
        if (!tape.val(comps[i]).all_finite())
            throw NumericError(std::string("total loss: non-finite ") + names[i] + " component");
    }
    return tape.add(l_struct, tape.add(tape.scale_const(l_temp, w.gamma_loss),
                                       tape.scale_const(l_cls, w.eta)));
}

} // namespace gcrmf
