#pragma once

#include <map>
#include <string>
#include <vector>

#include "annotator/annotate.hpp"
#include "annotator/corpus.hpp"

namespace annotator {

struct PrfCounts {
  long long tp = 0;
  long long fp = 0;
  long long fn = 0;

  // percentages in [0, 100]; 0 when the denominator is 0
  double precision() const;
  double recall() const;
  double f1() const;
};

struct MetricsReport {
  PrfCounts micro;
  std::map<std::string, PrfCounts> per_category;

  double precision() const { return micro.precision(); }
  double recall() const { return micro.recall(); }
  double f1() const { return micro.f1(); }
};

// Exact-match span scoring: a predicted span is a TP iff (start, end,
// category) all equal a gold span; micro-averaged over the corpus.
// Sentences pair by id; throws EvaluationError on id or token-count
// mismatch.
MetricsReport span_prf(const std::vector<Sentence>& pred,
                       const std::vector<Sentence>& gold);

// Convenience overload: annotated tags over the gold targets' tokens.
MetricsReport span_prf(const std::vector<AnnotatedSentence>& pred,
                       const std::vector<Sentence>& gold_targets);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

struct RunAggregate {
  std::size_t run_count = 0;
  bool degenerate_std = false;        // single run: std reported as 0
  std::string std_kind = "sample";    // n-1 denominator
  MeanStd precision;
  MeanStd recall;
  MeanStd f1;
};

RunAggregate aggregate_runs(const std::vector<MetricsReport>& reports);

// Emission: values rounded to 2 decimals, mirroring the result tables.
std::string metrics_to_json(const MetricsReport& report,
                            const std::map<std::string, std::string>& meta = {});
std::string aggregate_to_json(const RunAggregate& agg,
                              const std::map<std::string, std::string>& meta = {});
std::string metrics_to_table(const MetricsReport& report);

}  // namespace annotator
