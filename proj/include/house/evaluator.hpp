#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "house/dataset.hpp"
#include "house/model.hpp"

namespace house {

// Outcome of one ranking query: how the true entity placed among all
// candidates after filtering. Ties share the average of their positions.
struct RankResult {
  Triple triple;
  Side side = Side::kHead;  // which entity was predicted
  double rank = 0.0;
};

struct MetricsReport {
  double mr = 0.0;
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  std::size_t count = 0;
};

// Sequential left-fold over results in storage order; deterministic for a
// fixed result vector no matter how the ranks were computed.
MetricsReport metrics_from_results(std::span<const RankResult> results);

// Ranks the triple's head or tail against every entity. Candidates that
// form a different true triple with the rest of the query are filtered out;
// rank = 1 + #(strictly closer) + 0.5 * #(tied non-target).
RankResult filtered_rank(const Model& model, const Triple& triple, Side side,
                         const FilterIndex& filter);

// Both directions for every triple: results[2i] predicts the head of
// split[i], results[2i+1] its tail. Query placement is fixed, so the output
// is identical for any thread count.
std::vector<RankResult> rank_all(const Model& model, std::span<const Triple> split,
                                 const FilterIndex& filter, int threads = 1);

// Metrics over both directions of the whole split (2 * |split| queries).
MetricsReport evaluate(const Model& model, std::span<const Triple> split,
                       const FilterIndex& filter, int threads = 1);

// Metrics restricted to each relation appearing in the split.
std::map<std::int32_t, MetricsReport> per_relation_report(const Model& model,
                                                          std::span<const Triple> split,
                                                          const FilterIndex& filter,
                                                          int threads = 1);

// Metrics grouped by prediction side and the relation's mapping class.
std::map<std::pair<Side, RmpClass>, MetricsReport> rmp_report(
    const Model& model, std::span<const Triple> split, const FilterIndex& filter,
    std::span<const RmpStats> rmp, int threads = 1);

// Tab-separated writers, one row per report entry.
void write_metrics_tsv(std::ostream& out, const MetricsReport& report, const char* label);
void write_per_relation_tsv(std::ostream& out,
                            const std::map<std::int32_t, MetricsReport>& report,
                            const Vocab& vocab);
void write_rmp_tsv(std::ostream& out,
                   const std::map<std::pair<Side, RmpClass>, MetricsReport>& report);

}  // namespace house
