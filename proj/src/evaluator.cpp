#include "house/evaluator.hpp"

#include <algorithm>
#include <iomanip>
#include <stdexcept>

#include "house/parallel.hpp"

namespace house {

namespace {

// Tie-averaged rank of `target` within `scores`, skipping candidates listed
// in `known` (other true answers for the same query). The target itself is
// never filtered even when it appears in the known list.
double rank_from_scores(std::span<const double> scores, std::int32_t target,
                        const std::vector<std::int32_t>* known) {
  const double target_score = scores[std::size_t(target)];
  std::size_t smaller = 0;
  std::size_t equal = 0;
  for (std::int32_t j = 0; j < std::int32_t(scores.size()); ++j) {
    if (j == target) continue;
    if (known != nullptr && std::binary_search(known->begin(), known->end(), j)) continue;
    const double s = scores[std::size_t(j)];
    if (s < target_score) {
      ++smaller;
    } else if (s == target_score) {
      ++equal;
    }
  }
  return 1.0 + double(smaller) + 0.5 * double(equal);
}

const char* side_label(Side s) { return s == Side::kHead ? "head" : "tail"; }

void write_metric_row(std::ostream& out, const MetricsReport& r) {
  out << r.count << '\t' << r.mr << '\t' << r.mrr << '\t' << r.hits1 << '\t' << r.hits3
      << '\t' << r.hits10 << '\n';
}

}  // namespace

MetricsReport metrics_from_results(std::span<const RankResult> results) {
  MetricsReport rep;
  rep.count = results.size();
  if (results.empty()) return rep;
  double sum_rank = 0.0;
  double sum_inv = 0.0;
  std::size_t h1 = 0, h3 = 0, h10 = 0;
  for (const RankResult& r : results) {
    sum_rank += r.rank;
    sum_inv += 1.0 / r.rank;
    if (r.rank <= 1.0) ++h1;
    if (r.rank <= 3.0) ++h3;
    if (r.rank <= 10.0) ++h10;
  }
  const double n = double(rep.count);
  rep.mr = sum_rank / n;
  rep.mrr = sum_inv / n;
  rep.hits1 = double(h1) / n;
  rep.hits3 = double(h3) / n;
  rep.hits10 = double(h10) / n;
  return rep;
}

RankResult filtered_rank(const Model& model, const Triple& triple, Side side,
                         const FilterIndex& filter) {
  model.check_relation(triple.r);
  model.check_entity(triple.h);
  model.check_entity(triple.t);
  const std::int32_t target = side == Side::kHead ? triple.h : triple.t;
  const std::int32_t fixed = side == Side::kHead ? triple.t : triple.h;
  const std::vector<double> scores = score_candidates(model, fixed, triple.r, side);
  const std::vector<std::int32_t>* known = side == Side::kHead
                                               ? filter.heads(triple.r, triple.t)
                                               : filter.tails(triple.h, triple.r);
  return RankResult{triple, side, rank_from_scores(scores, target, known)};
}

std::vector<RankResult> rank_all(const Model& model, std::span<const Triple> split,
                                 const FilterIndex& filter, int threads) {
  std::vector<RankResult> results(split.size() * 2);
  parallel_for(split.size() * 2, threads, [&](std::size_t begin, std::size_t end, int) {
    RelationUnits units;
    units.resize(model.cfg);
    int cached_r = -1;
    std::vector<double> scores(std::size_t(model.cfg.num_entities));
    for (std::size_t q = begin; q < end; ++q) {
      const Triple& x = split[q / 2];
      const Side side = (q % 2 == 0) ? Side::kHead : Side::kTail;
      model.check_relation(x.r);
      model.check_entity(x.h);
      model.check_entity(x.t);
      if (x.r != cached_r) {
        normalize_relation(model, x.r, units);
        cached_r = x.r;
      }
      const std::int32_t target = side == Side::kHead ? x.h : x.t;
      const std::int32_t fixed = side == Side::kHead ? x.t : x.h;
      score_candidates_into(model, units, x.r, fixed, side, scores);
      const std::vector<std::int32_t>* known = side == Side::kHead
                                                   ? filter.heads(x.r, x.t)
                                                   : filter.tails(x.h, x.r);
      results[q] = RankResult{x, side, rank_from_scores(scores, target, known)};
    }
  });
  return results;
}

MetricsReport evaluate(const Model& model, std::span<const Triple> split,
                       const FilterIndex& filter, int threads) {
  if (split.empty()) throw std::invalid_argument("evaluate: empty split");
  const std::vector<RankResult> results = rank_all(model, split, filter, threads);
  return metrics_from_results(results);
}

std::map<std::int32_t, MetricsReport> per_relation_report(const Model& model,
                                                          std::span<const Triple> split,
                                                          const FilterIndex& filter,
                                                          int threads) {
  if (split.empty()) throw std::invalid_argument("per_relation_report: empty split");
  const std::vector<RankResult> results = rank_all(model, split, filter, threads);
  std::map<std::int32_t, std::vector<RankResult>> grouped;
  for (const RankResult& r : results) grouped[r.triple.r].push_back(r);
  std::map<std::int32_t, MetricsReport> report;
  for (const auto& [rel, rows] : grouped) report[rel] = metrics_from_results(rows);
  return report;
}

std::map<std::pair<Side, RmpClass>, MetricsReport> rmp_report(
    const Model& model, std::span<const Triple> split, const FilterIndex& filter,
    std::span<const RmpStats> rmp, int threads) {
  if (split.empty()) throw std::invalid_argument("rmp_report: empty split");
  const std::vector<RankResult> results = rank_all(model, split, filter, threads);
  std::map<std::pair<Side, RmpClass>, std::vector<RankResult>> grouped;
  for (const RankResult& r : results) {
    const RmpClass cls = std::size_t(r.triple.r) < rmp.size()
                             ? rmp[std::size_t(r.triple.r)].cls
                             : RmpClass::kUndefined;
    grouped[{r.side, cls}].push_back(r);
  }
  std::map<std::pair<Side, RmpClass>, MetricsReport> report;
  for (const auto& [key, rows] : grouped) report[key] = metrics_from_results(rows);
  return report;
}

void write_metrics_tsv(std::ostream& out, const MetricsReport& report, const char* label) {
  out << std::setprecision(10);
  out << "split\tqueries\tmr\tmrr\thits@1\thits@3\thits@10\n";
  out << label << '\t';
  write_metric_row(out, report);
}

void write_per_relation_tsv(std::ostream& out,
                            const std::map<std::int32_t, MetricsReport>& report,
                            const Vocab& vocab) {
  out << std::setprecision(10);
  out << "relation\tqueries\tmr\tmrr\thits@1\thits@3\thits@10\n";
  for (const auto& [rel, metrics] : report) {
    if (rel >= 0 && rel < vocab.num_relations()) {
      out << vocab.relation_names[std::size_t(rel)];
    } else {
      out << rel;
    }
    out << '\t';
    write_metric_row(out, metrics);
  }
}

void write_rmp_tsv(std::ostream& out,
                   const std::map<std::pair<Side, RmpClass>, MetricsReport>& report) {
  out << std::setprecision(10);
  out << "side\tclass\tqueries\tmr\tmrr\thits@1\thits@3\thits@10\n";
  for (const auto& [key, metrics] : report) {
    out << side_label(key.first) << '\t' << rmp_class_name(key.second) << '\t';
    write_metric_row(out, metrics);
  }
}

}  // namespace house
