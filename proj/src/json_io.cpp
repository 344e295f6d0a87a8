#include "netgt/json_io.hpp"

#include "netgt/error.hpp"

namespace netgt {

namespace {

std::vector<double> vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : j) {
    if (!x.is_number()) throw ConfigError(std::string(what) + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

const json& required(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::size_t count_from_json(const json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 1)
    throw ConfigError(std::string(what) + " must be a positive integer");
  return j.get<std::size_t>();
}

}  // namespace

std::string to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::chi2: return "chi2";
    case StatisticKind::osq: return "osq";
    case StatisticKind::pe: return "pe";
    case StatisticKind::signed_cycle: return "signed_cycle";
    case StatisticKind::signed_path: return "signed_path";
  }
  return "unknown";
}

StatisticKind parse_statistic(const std::string& name) {
  if (name == "chi2") return StatisticKind::chi2;
  if (name == "osq") return StatisticKind::osq;
  if (name == "pe") return StatisticKind::pe;
  throw ParameterError("unknown statistic '" + name + "' (expected chi2, osq or pe)");
}

std::string to_string(Normalization norm) {
  return norm == Normalization::asymptotic ? "asymptotic" : "finite_sample";
}

Normalization parse_normalization(const std::string& name) {
  if (name == "finite_sample") return Normalization::finite_sample;
  if (name == "asymptotic") return Normalization::asymptotic;
  throw ParameterError("unknown normalization '" + name + "' (expected finite_sample or asymptotic)");
}

json to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (double x : m.row(i)) row.push_back(x);
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("matrix must be a nonempty array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) rows.push_back(vector_from_json(r, "matrix row"));
  for (const auto& r : rows)
    if (r.size() != rows.front().size()) throw ConfigError("matrix rows differ in length");
  return Matrix::from_rows(rows);
}

json to_json(const TestReport& r) {
  return json{{"kind", to_string(r.kind)},
              {"order", r.order},
              {"raw", r.raw},
              {"normalized", r.normalized},
              {"normalization", to_string(r.normalization)},
              {"p_value", r.p_value},
              {"level", r.level},
              {"reject", r.reject},
              {"n", r.n},
              {"alpha_hat", {{"raw", r.alpha_hat.raw},
                             {"clamped", r.alpha_hat.clamped},
                             {"was_clamped", r.alpha_hat.was_clamped}}}};
}

json to_json(const TheoryReport& r) {
  return json{{"alpha0", r.alpha0},
              {"M", to_json(r.M)},
              {"h", r.h},
              {"G", to_json(r.G)},
              {"delta_n", r.delta_n},
              {"tau_n", r.tau_n},
              {"beta_n", r.beta_n},
              {"n", r.n},
              {"diagnostics", {{"h_ratio", r.diagnostics.h_ratio},
                               {"g_inverse_norm", r.diagnostics.g_inverse_norm},
                               {"alpha0", r.diagnostics.alpha0},
                               {"n_alpha0", r.diagnostics.n_alpha0},
                               {"warnings", r.diagnostics.warnings}}}};
}

json to_json(const ExactSnrReport& r) {
  return json{{"snr_chi2", r.snr_chi2},
              {"snr_osq", r.snr_osq},
              {"chi2_numerator", r.chi2_numerator},
              {"chi2_denominator", r.chi2_denominator},
              {"osq_numerator", r.osq_numerator},
              {"osq_denominator", r.osq_denominator}};
}

json to_json(const IncResult& r) {
  return json{{"k_omega", r.vertex_count},
              {"rank", r.rank},
              {"eigenvalues", r.eigenvalues},
              {"vertex_indices", r.vertex_indices},
              {"ambiguous_indices", r.ambiguous_indices},
              {"distinct_rows", r.distinct_rows},
              {"rank_tol", r.rank_tol},
              {"hull_tol", r.hull_tol}};
}

json to_json(const MmsbmParams& p) {
  json membership = std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FixedMembership>) return {{"type", "fixed"}, {"pi", to_json(m.pi)}};
        else if constexpr (std::is_same_v<T, PureMembership>) return {{"type", "pure"}, {"h", m.h}};
        else return {{"type", "dirichlet"}, {"concentration", m.concentration}};
      },
      p.membership);
  return json{{"K", p.K}, {"n", p.n}, {"P", to_json(p.P)}, {"membership", std::move(membership)}};
}

MmsbmParams params_from_json(const json& j) {
  MmsbmParams p;
  p.K = count_from_json(required(j, "K"), "K");
  p.n = count_from_json(required(j, "n"), "n");
  p.P = matrix_from_json(required(j, "P"));
  const json& m = required(j, "membership");
  const json& type = required(m, "type");
  if (!type.is_string()) throw ConfigError("membership type must be a string");
  const auto t = type.get<std::string>();
  if (t == "balanced") {
    p.membership = FixedMembership{balanced_memberships(p.n, p.K)};
  } else if (t == "fixed") {
    p.membership = FixedMembership{matrix_from_json(required(m, "pi"))};
  } else if (t == "pure") {
    p.membership = PureMembership{vector_from_json(required(m, "h"), "h")};
  } else if (t == "dirichlet") {
    p.membership = DirichletMembership{vector_from_json(required(m, "concentration"), "concentration")};
  } else {
    throw ConfigError("unknown membership type '" + t + "'");
  }
  try {
    p.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  return p;
}

}  // namespace netgt
