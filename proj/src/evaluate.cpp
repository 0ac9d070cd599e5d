#include "annotator/evaluate.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "annotator/errors.hpp"

namespace annotator {

namespace {

double pct(long long num, long long den) {
  return den == 0 ? 0.0
                  : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

double PrfCounts::precision() const { return pct(tp, tp + fp); }
double PrfCounts::recall() const { return pct(tp, tp + fn); }
double PrfCounts::f1() const {
  const double p = precision(), r = recall();
  return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

MetricsReport span_prf(const std::vector<Sentence>& pred,
                       const std::vector<Sentence>& gold) {
  if (pred.size() != gold.size())
    throw EvaluationError("prediction/gold sentence counts differ: " +
                          std::to_string(pred.size()) + " vs " +
                          std::to_string(gold.size()));

  auto by_id = [](const std::vector<Sentence>& v) {
    std::vector<const Sentence*> out;
    out.reserve(v.size());
    for (const auto& s : v) out.push_back(&s);
    std::sort(out.begin(), out.end(),
              [](const Sentence* a, const Sentence* b) { return a->id < b->id; });
    return out;
  };
  const auto p_sorted = by_id(pred);
  const auto g_sorted = by_id(gold);

  MetricsReport report;
  for (std::size_t i = 0; i < p_sorted.size(); ++i) {
    const Sentence& p = *p_sorted[i];
    const Sentence& g = *g_sorted[i];
    if (p.id != g.id)
      throw EvaluationError("sentence id mismatch: prediction " +
                            std::to_string(p.id) + " vs gold " +
                            std::to_string(g.id));
    if (p.tokens.size() != g.tokens.size())
      throw EvaluationError("token count mismatch at sentence " +
                            std::to_string(g.id));

    // spans inside one sentence are unique triples (non-overlapping), so a
    // set intersection is exact
    auto triples = [](const Sentence& s) {
      std::set<std::tuple<std::size_t, std::size_t, std::string>> out;
      for (const auto& span : extract_entities(s))
        out.emplace(span.start, span.end, span.category);
      return out;
    };
    const auto p_spans = triples(p);
    const auto g_spans = triples(g);

    for (const auto& span : p_spans) {
      auto& cat = report.per_category[std::get<2>(span)];
      if (g_spans.count(span)) {
        ++report.micro.tp;
        ++cat.tp;
      } else {
        ++report.micro.fp;
        ++cat.fp;
      }
    }
    for (const auto& span : g_spans) {
      if (!p_spans.count(span)) {
        ++report.micro.fn;
        ++report.per_category[std::get<2>(span)].fn;
      }
    }
  }
  return report;
}

MetricsReport span_prf(const std::vector<AnnotatedSentence>& pred,
                       const std::vector<Sentence>& gold_targets) {
  std::map<int, const Sentence*> gold_by_id;
  for (const auto& g : gold_targets) gold_by_id[g.id] = &g;

  std::vector<Sentence> pred_sentences;
  pred_sentences.reserve(pred.size());
  for (const auto& a : pred) {
    auto it = gold_by_id.find(a.sentence_id);
    if (it == gold_by_id.end())
      throw EvaluationError("no gold sentence for annotated id " +
                            std::to_string(a.sentence_id));
    Sentence s;
    s.id = a.sentence_id;
    s.tokens = it->second->tokens;
    s.tags = a.tags;
    pred_sentences.push_back(std::move(s));
  }
  return span_prf(pred_sentences, gold_targets);
}

RunAggregate aggregate_runs(const std::vector<MetricsReport>& reports) {
  if (reports.empty())
    throw EvaluationError("aggregate_runs needs at least one report");

  auto mean_std = [&](auto metric) {
    MeanStd ms;
    const double n = static_cast<double>(reports.size());
    for (const auto& r : reports) ms.mean += metric(r);
    ms.mean /= n;
    if (reports.size() > 1) {
      double ss = 0.0;
      for (const auto& r : reports) {
        const double d = metric(r) - ms.mean;
        ss += d * d;
      }
      ms.std = std::sqrt(ss / (n - 1.0));
    }
    return ms;
  };

  RunAggregate agg;
  agg.run_count = reports.size();
  agg.degenerate_std = reports.size() == 1;
  agg.precision = mean_std([](const MetricsReport& r) { return r.precision(); });
  agg.recall = mean_std([](const MetricsReport& r) { return r.recall(); });
  agg.f1 = mean_std([](const MetricsReport& r) { return r.f1(); });
  return agg;
}

std::string metrics_to_json(const MetricsReport& report,
                            const std::map<std::string, std::string>& meta) {
  nlohmann::ordered_json j;
  if (!meta.empty()) j["meta"] = meta;
  j["precision"] = round2(report.precision());
  j["recall"] = round2(report.recall());
  j["f1"] = round2(report.f1());
  j["counts"] = {{"tp", report.micro.tp},
                 {"fp", report.micro.fp},
                 {"fn", report.micro.fn}};
  for (const auto& [cat, counts] : report.per_category) {
    j["per_category"][cat] = {{"precision", round2(counts.precision())},
                              {"recall", round2(counts.recall())},
                              {"f1", round2(counts.f1())},
                              {"tp", counts.tp},
                              {"fp", counts.fp},
                              {"fn", counts.fn}};
  }
  return j.dump(2) + "\n";
}

std::string aggregate_to_json(const RunAggregate& agg,
                              const std::map<std::string, std::string>& meta) {
  nlohmann::ordered_json j;
  if (!meta.empty()) j["meta"] = meta;
  j["runs"] = agg.run_count;
  j["std_kind"] = agg.std_kind;
  j["degenerate_std"] = agg.degenerate_std;
  auto put = [&](const char* name, const MeanStd& ms) {
    j[name] = {{"mean", round2(ms.mean)}, {"std", round2(ms.std)}};
  };
  put("precision", agg.precision);
  put("recall", agg.recall);
  put("f1", agg.f1);
  return j.dump(2) + "\n";
}

std::string metrics_to_table(const MetricsReport& report) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-12s %10s %10s %10s %8s %8s %8s\n",
                "category", "P", "R", "F1", "tp", "fp", "fn");
  out << line;
  auto row = [&](const std::string& name, const PrfCounts& c) {
    std::snprintf(line, sizeof(line),
                  "%-12s %10.2f %10.2f %10.2f %8lld %8lld %8lld\n",
                  name.c_str(), c.precision(), c.recall(), c.f1(), c.tp, c.fp,
                  c.fn);
    out << line;
  };
  for (const auto& [cat, counts] : report.per_category) row(cat, counts);
  row("ALL", report.micro);
  return out.str();
}

}  // namespace annotator
