#include "annotator/stats.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "annotator/errors.hpp"
#include "annotator/util.hpp"

namespace annotator {

namespace special {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxIter = 1000;

// Lower regularized gamma P(s,x) by series expansion; valid for x < s + 1.
double gamma_p_series(double s, double x) {
  double term = 1.0 / s;
  double sum = term;
  double a = s;
  for (int i = 0; i < kMaxIter; ++i) {
    a += 1.0;
    term *= x / a;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kEps) break;
  }
  return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Upper regularized gamma Q(s,x) by modified Lentz continued fraction;
// valid for x >= s + 1.
double gamma_q_cf(double s, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + s * std::log(x) - std::lgamma(s)) * h;
}

}  // namespace

double regularized_gamma_q(double s, double x) {
  if (s <= 0.0) throw ValidationError("gamma Q needs s > 0");
  if (x < 0.0) throw ValidationError("gamma Q needs x >= 0");
  if (x == 0.0) return 1.0;
  if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
  return gamma_q_cf(s, x);
}

double chi_square_sf(double x, int df) {
  if (df < 1) throw ValidationError("chi-square needs df >= 1");
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

namespace {

double beta_cf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_beta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw ValidationError("beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                          std::lgamma(b) + a * std::log(x) +
                          b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double df) {
  if (df <= 0.0) throw ValidationError("t distribution needs df > 0");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * regularized_beta(0.5 * df, 0.5, x);
  return t >= 0.0 ? tail : 1.0 - tail;
}

}  // namespace special

void ScoreMatrix::validate() const {
  if (methods.size() < 2)
    throw ValidationError("score matrix needs k >= 2 methods, got " +
                          std::to_string(methods.size()));
  if (conditions.size() < 2)
    throw ValidationError("score matrix needs N >= 2 conditions, got " +
                          std::to_string(conditions.size()));
  if (scores.size() != conditions.size())
    throw ValidationError("score matrix row count mismatch");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].size() != methods.size())
      throw ValidationError("score matrix row '" + conditions[i] + "' has " +
                            std::to_string(scores[i].size()) + " cells, need " +
                            std::to_string(methods.size()));
    for (double v : scores[i])
      if (!std::isfinite(v))
        throw ValidationError("non-finite score in row '" + conditions[i] + "'");
  }
}

RankMatrix rank_scores(const ScoreMatrix& m) {
  m.validate();
  const std::size_t k = m.n_methods();
  RankMatrix out;
  out.ranks.reserve(m.n_conditions());
  out.mean_ranks.assign(k, 0.0);

  for (const auto& row : m.scores) {
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (row[a] != row[b]) return row[a] > row[b];  // best score first
      return a < b;
    });

    std::vector<double> ranks(k, 0.0);
    std::size_t i = 0;
    while (i < k) {
      std::size_t j = i;
      while (j + 1 < k && row[order[j + 1]] == row[order[i]]) ++j;
      // positions i..j (0-based) share the average of ranks i+1..j+1
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
      i = j + 1;
    }
    for (std::size_t c = 0; c < k; ++c) out.mean_ranks[c] += ranks[c];
    out.ranks.push_back(std::move(ranks));
  }
  const double n = static_cast<double>(out.ranks.size());
  for (double& r : out.mean_ranks) r /= n;
  return out;
}

FriedmanResult friedman(const RankMatrix& r) {
  const std::size_t n = r.n_conditions();
  const std::size_t k = r.n_methods();
  if (n < 2 || k < 2)
    throw ValidationError("friedman needs N >= 2 and k >= 2");

  const double N = static_cast<double>(n);
  const double K = static_cast<double>(k);

  double sum_mean_sq = 0.0;
  for (double mr : r.mean_ranks) sum_mean_sq += mr * mr;
  double chi2 = 12.0 * N / (K * (K + 1.0)) * sum_mean_sq - 3.0 * N * (K + 1.0);

  // same statistic from rank sums; both forms must agree
  double sum_rank_sq = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) rank_sum += r.ranks[i][j];
    sum_rank_sq += rank_sum * rank_sum;
  }
  const double chi2_sum_form =
      12.0 / (N * K * (K + 1.0)) * sum_rank_sq - 3.0 * N * (K + 1.0);
  if (std::fabs(chi2 - chi2_sum_form) > 1e-8 * std::max(1.0, std::fabs(chi2)))
    throw Error("friedman internal consistency check failed");

  if (std::fabs(chi2) < 1e-12) chi2 = 0.0;  // all-tied rows leave fp dust

  FriedmanResult result;
  result.chi2 = chi2;
  result.df = static_cast<int>(k) - 1;
  result.p_value = special::chi_square_sf(chi2, result.df);
  result.n = n;
  result.k = k;
  result.mean_ranks = r.mean_ranks;
  return result;
}

namespace {

std::vector<double> adjust_pvalues(std::vector<double> raw, PAdjust method) {
  const std::size_t m = raw.size();
  if (m == 0 || method == PAdjust::none) return raw;
  if (method == PAdjust::bonferroni) {
    for (double& p : raw) p = std::min(1.0, p * static_cast<double>(m));
    return raw;
  }
  // Holm step-down
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
  std::vector<double> adjusted(m);
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double stepped =
        std::min(1.0, static_cast<double>(m - i) * raw[order[i]]);
    running = std::max(running, stepped);
    adjusted[order[i]] = running;
  }
  return adjusted;
}

}  // namespace

std::string_view p_adjust_name(PAdjust adjust) {
  switch (adjust) {
    case PAdjust::none: return "none";
    case PAdjust::bonferroni: return "bonferroni";
    case PAdjust::holm: return "holm";
  }
  return "holm";
}

PAdjust p_adjust_from_name(std::string_view name) {
  if (name == "none") return PAdjust::none;
  if (name == "bonferroni") return PAdjust::bonferroni;
  if (name == "holm") return PAdjust::holm;
  throw ConfigError("unknown p adjustment '" + std::string(name) +
                    "' (expected none|bonferroni|holm)");
}

ConoverResult conover_posthoc(const RankMatrix& r, double alpha,
                              PAdjust adjust) {
  const std::size_t n = r.n_conditions();
  const std::size_t k = r.n_methods();
  if (n < 2 || k < 2)
    throw ValidationError("conover needs N >= 2 and k >= 2");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("alpha must be in (0,1)");

  const double N = static_cast<double>(n);
  const double K = static_cast<double>(k);

  std::vector<double> rank_sums(k, 0.0);
  double a1 = 0.0;  // sum of squared ranks over all cells
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      rank_sums[j] += r.ranks[i][j];
      a1 += r.ranks[i][j] * r.ranks[i][j];
    }
  }
  const double c1 = N * K * (K + 1.0) * (K + 1.0) / 4.0;
  const double s2 = a1 - c1;  // rank variance over the N x k table

  ConoverResult result;
  result.alpha = alpha;
  result.adjust = adjust;
  result.p.assign(k, std::vector<double>(k, 1.0));

  std::vector<double> raw;
  raw.reserve(k * (k - 1) / 2);

  if (s2 <= 1e-12) {
    // every rank tied everywhere: nothing is distinguishable
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) raw.push_back(1.0);
  } else {
    // ties-corrected Friedman statistic used by the variance estimate
    double t1_num = 0.0;
    for (double rs : rank_sums) {
      const double d = rs - N * (K + 1.0) / 2.0;
      t1_num += d * d;
    }
    const double t1 = (K - 1.0) * t1_num / s2;
    const double df = (N - 1.0) * (K - 1.0);
    const double se_sq =
        (2.0 * N * s2 / df) * (1.0 - t1 / (N * (K - 1.0)));

    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        const double dif = std::fabs(rank_sums[i] - rank_sums[j]);
        double p;
        if (dif == 0.0) {
          p = 1.0;
        } else if (se_sq <= 0.0) {
          // identical rankings across every condition: any difference in
          // rank sums is infinitely significant under this estimate
          p = 0.0;
        } else {
          const double t = dif / std::sqrt(se_sq);
          p = std::min(1.0, 2.0 * special::student_t_sf(t, df));
        }
        raw.push_back(p);
      }
    }
  }

  const auto adjusted = adjust_pvalues(raw, adjust);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j, ++idx) {
      result.p[i][j] = adjusted[idx];
      result.p[j][i] = adjusted[idx];
    }
  }

  // groups: connected components of the "not significant" relation
  std::vector<std::size_t> parent(k);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j)
      if (result.p[i][j] >= alpha) parent[find(i)] = find(j);

  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < k; ++i) components[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> groups;
  for (auto& [root, members] : components) groups.push_back(std::move(members));
  std::sort(groups.begin(), groups.end(),
            [&](const auto& a, const auto& b) {
              double best_a = r.mean_ranks[a.front()];
              for (auto i : a) best_a = std::min(best_a, r.mean_ranks[i]);
              double best_b = r.mean_ranks[b.front()];
              for (auto i : b) best_b = std::min(best_b, r.mean_ranks[i]);
              return best_a < best_b;
            });
  result.groups = std::move(groups);
  return result;
}

namespace {

std::vector<std::size_t> methods_by_rank(const RankMatrix& r) {
  std::vector<std::size_t> order(r.n_methods());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (r.mean_ranks[a] != r.mean_ranks[b])
      return r.mean_ranks[a] < r.mean_ranks[b];
    return a < b;
  });
  return order;
}

std::vector<std::size_t> group_of_each(const ConoverResult& c, std::size_t k) {
  std::vector<std::size_t> owner(k, 0);
  for (std::size_t g = 0; g < c.groups.size(); ++g)
    for (std::size_t member : c.groups[g]) owner[member] = g;
  return owner;
}

}  // namespace

std::string cd_report_csv(const ConoverResult& c, const RankMatrix& r,
                          const std::vector<std::string>& methods) {
  const auto order = methods_by_rank(r);
  const auto owner = group_of_each(c, methods.size());
  std::ostringstream out;
  out << "method,mean_rank,group\n";
  for (std::size_t i : order) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", r.mean_ranks[i]);
    out << methods[i] << ',' << buf << ',' << owner[i] << '\n';
  }
  return out.str();
}

std::string cd_report_json(const ConoverResult& c, const RankMatrix& r,
                           const std::vector<std::string>& methods) {
  const auto order = methods_by_rank(r);
  const auto owner = group_of_each(c, methods.size());
  nlohmann::ordered_json j;
  j["alpha"] = c.alpha;
  j["adjust"] = p_adjust_name(c.adjust);
  j["methods"] = nlohmann::json::array();
  for (std::size_t i : order) {
    j["methods"].push_back({{"name", methods[i]},
                            {"mean_rank", r.mean_ranks[i]},
                            {"group", owner[i]}});
  }
  j["groups"] = nlohmann::ordered_json::array();
  for (const auto& group : c.groups) {
    nlohmann::ordered_json names = nlohmann::ordered_json::array();
    for (std::size_t member : group) names.push_back(methods[member]);
    j["groups"].push_back(names);
  }
  return j.dump(2) + "\n";
}

std::string friedman_to_json(const FriedmanResult& f,
                             const std::vector<std::string>& methods) {
  nlohmann::ordered_json j;
  j["chi2"] = f.chi2;
  j["df"] = f.df;
  j["p_value"] = f.p_value;
  j["n_conditions"] = f.n;
  j["n_methods"] = f.k;
  for (std::size_t i = 0; i < methods.size(); ++i)
    j["mean_ranks"][methods[i]] = f.mean_ranks[i];
  return j.dump(2) + "\n";
}

std::string conover_to_csv(const ConoverResult& c,
                           const std::vector<std::string>& methods) {
  std::ostringstream out;
  out << "method";
  for (const auto& m : methods) out << ',' << m;
  out << '\n';
  for (std::size_t i = 0; i < methods.size(); ++i) {
    out << methods[i];
    for (std::size_t j = 0; j < methods.size(); ++j) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.12g", c.p[i][j]);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(trim(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  out.push_back(trim(field));
  return out;
}

}  // namespace

ScoreMatrix read_score_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ScoreMatrix m;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      if (fields.size() < 3)
        throw ParseError("score CSV header needs >= 2 method columns");
      m.methods.assign(fields.begin() + 1, fields.end());
      have_header = true;
      continue;
    }
    if (fields.size() != m.methods.size() + 1)
      throw ParseError("score CSV line " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " cells, expected " +
                       std::to_string(m.methods.size() + 1));
    m.conditions.push_back(fields[0]);
    std::vector<double> row;
    row.reserve(m.methods.size());
    for (std::size_t i = 1; i < fields.size(); ++i) {
      try {
        std::size_t consumed = 0;
        row.push_back(std::stod(fields[i], &consumed));
        if (consumed != fields[i].size()) throw std::invalid_argument(fields[i]);
      } catch (const std::exception&) {
        throw ParseError("score CSV line " + std::to_string(line_no) +
                         ": bad number '" + fields[i] + "'");
      }
    }
    m.scores.push_back(std::move(row));
  }
  m.validate();
  return m;
}

ScoreMatrix load_score_csv(const std::filesystem::path& path) {
  return read_score_csv(read_file(path));
}

std::string write_score_csv(const ScoreMatrix& m) {
  std::ostringstream out;
  out << "condition";
  for (const auto& name : m.methods) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < m.conditions.size(); ++i) {
    out << m.conditions[i];
    for (double v : m.scores[i]) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6f", v);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace annotator
