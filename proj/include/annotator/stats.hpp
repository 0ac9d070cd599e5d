#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace annotator {

// Scores of k methods over N conditions, higher is better.
// scores[condition][method].
struct ScoreMatrix {
  std::vector<std::string> methods;
  std::vector<std::string> conditions;
  std::vector<std::vector<double>> scores;

  std::size_t n_conditions() const { return conditions.size(); }
  std::size_t n_methods() const { return methods.size(); }
  void validate() const;  // k >= 2, N >= 2, no missing cells
};

// Within-condition ranks, 1 = best; tied values share the average of their
// positions, so every row sums to k(k+1)/2.
struct RankMatrix {
  std::vector<std::vector<double>> ranks;  // N x k
  std::vector<double> mean_ranks;          // per method

  std::size_t n_conditions() const { return ranks.size(); }
  std::size_t n_methods() const { return mean_ranks.size(); }
};

struct FriedmanResult {
  double chi2 = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::size_t n = 0;  // conditions
  std::size_t k = 0;  // methods
  std::vector<double> mean_ranks;
};

enum class PAdjust { none, bonferroni, holm };

std::string_view p_adjust_name(PAdjust adjust);
PAdjust p_adjust_from_name(std::string_view name);

struct ConoverResult {
  std::vector<std::vector<double>> p;  // k x k, symmetric, diagonal 1
  double alpha = 0.01;
  PAdjust adjust = PAdjust::holm;
  // connected components of the "not significant at alpha" relation,
  // ordered by their best mean rank; they partition the methods
  std::vector<std::vector<std::size_t>> groups;
};

RankMatrix rank_scores(const ScoreMatrix& m);

// Mean-rank form chi2 = 12N/(k(k+1)) * sum R_j^2 - 3N(k+1); internally
// cross-checked against the algebraically equal rank-sum form. An all-tied
// matrix yields chi2 = 0, p = 1.
FriedmanResult friedman(const RankMatrix& r);

// Pairwise t statistics on rank sums with the rank-variance estimate over
// the N x k ranks (Conover 1999), df = (N-1)(k-1); p-values adjusted by
// `adjust` (Holm step-down by default). Degenerate rank variance (all ranks
// tied everywhere) gives all pairwise p = 1.
ConoverResult conover_posthoc(const RankMatrix& r, double alpha,
                              PAdjust adjust = PAdjust::holm);

// Data behind a critical-difference diagram: methods sorted by mean rank
// with the group bar each belongs to.
std::string cd_report_csv(const ConoverResult& c, const RankMatrix& r,
                          const std::vector<std::string>& methods);
std::string cd_report_json(const ConoverResult& c, const RankMatrix& r,
                           const std::vector<std::string>& methods);

std::string friedman_to_json(const FriedmanResult& f,
                             const std::vector<std::string>& methods);
std::string conover_to_csv(const ConoverResult& c,
                           const std::vector<std::string>& methods);

// CSV with header row = method names and first column = condition names.
ScoreMatrix read_score_csv(const std::string& text);
ScoreMatrix load_score_csv(const std::filesystem::path& path);
std::string write_score_csv(const ScoreMatrix& m);

// Special functions backing the tests above. Accuracy target for the
// chi-square survival function: relative error < 1e-10 against the
// closed-form reference for df in {1..30}, x in (0, 200].
namespace special {

// Regularized upper incomplete gamma Q(s, x): series for x < s+1, Lentz
// continued fraction otherwise.
double regularized_gamma_q(double s, double x);

// P(chi2 >= x) with df degrees of freedom = Q(df/2, x/2).
double chi_square_sf(double x, int df);

// Regularized incomplete beta I_x(a, b) via continued fraction.
double regularized_beta(double a, double b, double x);

// One-sided upper tail of Student's t.
double student_t_sf(double t, double df);

}  // namespace special

}  // namespace annotator
