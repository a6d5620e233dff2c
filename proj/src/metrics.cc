// src/metrics.cc

#include "dysflux/metrics.h"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace dysflux {

namespace {

template <typename T>
EditOps Levenshtein(const std::vector<T> &ref, const std::vector<T> &hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  Matrix<int64_t> d(n + 1, m + 1, 0);
  for (std::size_t i = 0; i <= n; ++i) d(i, 0) = static_cast<int64_t>(i);
  for (std::size_t j = 0; j <= m; ++j) d(0, j) = static_cast<int64_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      d(i, j) = std::min({d(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1),
                          d(i - 1, j) + 1, d(i, j - 1) + 1});
    }
  }
  EditOps ops;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && d(i, j) == d(i - 1, j - 1)) {
      ++ops.matches;
      --i;
      --j;
    } else if (i > 0 && j > 0 && d(i, j) == d(i - 1, j - 1) + 1) {
      ++ops.substitutions;
      --i;
      --j;
    } else if (i > 0 && d(i, j) == d(i - 1, j) + 1) {
      ++ops.deletions;
      --i;
    } else {
      ++ops.insertions;
      --j;
    }
  }
  return ops;
}

}  // namespace

EditOps EditDistance(const std::vector<PhoneId> &ref, const std::vector<PhoneId> &hyp) {
  return Levenshtein(ref, hyp);
}

EditOps EditDistance(const std::vector<std::string> &ref,
                     const std::vector<std::string> &hyp) {
  return Levenshtein(ref, hyp);
}

double Per(const std::vector<PhoneId> &ref, const std::vector<PhoneId> &hyp) {
  if (ref.empty()) throw DataError("PER needs a non-empty reference");
  return static_cast<double>(EditDistance(ref, hyp).errors()) /
         static_cast<double>(ref.size());
}

double Iwer(const std::vector<std::string> &target, const std::vector<std::string> &hyp) {
  if (target.empty()) throw DataError("iWER needs a non-empty target");
  return static_cast<double>(EditDistance(target, hyp).errors()) /
         static_cast<double>(target.size());
}

EditOps DurationEditDistance(const AlignmentSegments &ref, const AlignmentSegments &hyp,
                             SubstitutionCost sub, double *total_cost) {
  const std::size_t n = ref.size(), m = hyp.size();
  auto sub_cost = [&](std::size_t i, std::size_t j) {
    const double r = ref.Duration(i), h = hyp.Duration(j);
    return sub == SubstitutionCost::kMax ? std::max(r, h) : (r + h) / 2;
  };
  Matrix<double> d(n + 1, m + 1, 0.0);
  for (std::size_t i = 1; i <= n; ++i) d(i, 0) = d(i - 1, 0) + ref.Duration(i - 1);
  for (std::size_t j = 1; j <= m; ++j) d(0, j) = d(0, j - 1) + hyp.Duration(j - 1);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const bool same = ref.segments[i - 1].phone == hyp.segments[j - 1].phone;
      d(i, j) = std::min({d(i - 1, j - 1) + (same ? 0.0 : sub_cost(i - 1, j - 1)),
                          d(i - 1, j) + ref.Duration(i - 1),
                          d(i, j - 1) + hyp.Duration(j - 1)});
    }
  }
  if (total_cost != nullptr) *total_cost = d(n, m);

  EditOps ops;
  ops.durations.emplace();
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref.segments[i - 1].phone == hyp.segments[j - 1].phone &&
        d(i, j) == d(i - 1, j - 1)) {
      ++ops.matches;
      --i;
      --j;
    } else if (i > 0 && j > 0 && d(i, j) == d(i - 1, j - 1) + sub_cost(i - 1, j - 1)) {
      ++ops.substitutions;
      ops.durations->substitutions += sub_cost(i - 1, j - 1);
      --i;
      --j;
    } else if (i > 0 && d(i, j) == d(i - 1, j) + ref.Duration(i - 1)) {
      ++ops.deletions;
      ops.durations->deletions += ref.Duration(i - 1);
      --i;
    } else {
      ++ops.insertions;
      ops.durations->insertions += hyp.Duration(j - 1);
      --j;
    }
  }
  return ops;
}

double Dper(const AlignmentSegments &ref, const AlignmentSegments &hyp,
            SubstitutionCost sub) {
  double total_ref = 0.0;
  for (std::size_t i = 0; i != ref.size(); ++i) total_ref += ref.Duration(i);
  if (!(total_ref > 0.0)) throw DataError("dPER needs a reference with positive duration");
  double cost = 0.0;
  DurationEditDistance(ref, hyp, sub, &cost);
  return cost / total_ref;
}

FrameF1Score FrameF1(const std::vector<PhoneId> &ref, const std::vector<PhoneId> &hyp) {
  if (ref.size() != hyp.size()) {
    throw DataError("frame F1 needs equal lengths (" + std::to_string(ref.size()) +
                    " vs " + std::to_string(hyp.size()) + ")");
  }
  if (ref.empty()) throw DataError("frame F1 needs at least one frame");
  std::map<PhoneId, int64_t> tp, fp, fn;
  int64_t correct = 0;
  for (std::size_t t = 0; t != ref.size(); ++t) {
    if (ref[t] == hyp[t]) {
      ++correct;
      ++tp[ref[t]];
    } else {
      ++fn[ref[t]];
      ++fp[hyp[t]];
    }
  }
  FrameF1Score s;
  s.micro = static_cast<double>(correct) / static_cast<double>(ref.size());
  std::set<PhoneId> classes(ref.begin(), ref.end());
  double sum = 0.0;
  for (PhoneId c : classes) {
    const double denom = 2.0 * tp[c] + fp[c] + fn[c];
    sum += denom > 0 ? 2.0 * tp[c] / denom : 0.0;
  }
  s.macro = sum / static_cast<double>(classes.size());
  return s;
}

double Iou(const Interval &a, const Interval &b) {
  const double inter = std::max(0.0, std::min(a.end_s, b.end_s) - std::max(a.start_s, b.start_s));
  const double uni = a.Length() + b.Length() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

void FillRates(MatchResult &r) {
  const double tp = static_cast<double>(r.true_positives);
  const int64_t pred = r.true_positives + r.false_positives;
  const int64_t gt = r.true_positives + r.false_negatives;
  if (pred == 0 && gt == 0) {
    r.precision = r.recall = r.f1 = 1.0;
    return;
  }
  r.precision = pred > 0 ? tp / static_cast<double>(pred) : 0.0;
  r.recall = gt > 0 ? tp / static_cast<double>(gt) : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
}

MatchResult MatchingScore(const std::vector<MatchItem> &pred,
                          const std::vector<MatchItem> &gt) {
  const std::size_t np = pred.size(), ng = gt.size();
  std::vector<std::vector<int32_t>> adj(np);
  std::vector<std::tuple<double, int32_t, int32_t>> candidates;
  for (std::size_t p = 0; p != np; ++p) {
    for (std::size_t g = 0; g != ng; ++g) {
      if (pred[p].key != gt[g].key) continue;
      const double iou = Iou(pred[p].interval, gt[g].interval);
      if (iou > kMatchIou) {
        adj[p].push_back(static_cast<int32_t>(g));
        candidates.emplace_back(-iou, static_cast<int32_t>(p), static_cast<int32_t>(g));
      }
    }
  }
  std::sort(candidates.begin(), candidates.end());

  std::vector<int32_t> pred_to(np, -1), gt_to(ng, -1);
  for (auto [neg_iou, p, g] : candidates) {
    if (pred_to[p] < 0 && gt_to[g] < 0) {
      pred_to[p] = g;
      gt_to[g] = p;
    }
  }

  // Augmenting paths make the greedy matching maximum.
  std::vector<char> seen;
  auto augment = [&](auto &self, int32_t p) -> bool {
    for (int32_t g : adj[p]) {
      if (seen[g]) continue;
      seen[g] = 1;
      if (gt_to[g] < 0 || self(self, gt_to[g])) {
        pred_to[p] = g;
        gt_to[g] = p;
        return true;
      }
    }
    return false;
  };
  for (std::size_t p = 0; p != np; ++p) {
    if (pred_to[p] >= 0) continue;
    seen.assign(ng, 0);
    augment(augment, static_cast<int32_t>(p));
  }

  MatchResult r;
  for (std::size_t p = 0; p != np; ++p) {
    if (pred_to[p] >= 0) r.pairs.emplace_back(static_cast<int32_t>(p), pred_to[p]);
  }
  r.true_positives = static_cast<int64_t>(r.pairs.size());
  r.false_positives = static_cast<int64_t>(np) - r.true_positives;
  r.false_negatives = static_cast<int64_t>(ng) - r.true_positives;
  FillRates(r);
  return r;
}

}  // namespace dysflux
