#include "dpmseq/cli/model_io.hpp"

#include "dpmseq/urn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <type_traits>

namespace dpmseq::cli {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows == 0) throw std::invalid_argument("model: empty matrix");
  const auto cols = static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw std::invalid_argument("model: ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

template <class P>
json params_to_json(const P& p) {
  if constexpr (std::is_same_v<P, NigParams>)
    return nig_to_json(p);
  else
    return niw_to_json(p);
}

template <class P>
json state_to_json(const FitState<P>& st) {
  json j;
  j["family"] = std::is_same_v<P, NigParams> ? "nig" : "niw";
  j["dim"] = dimension(st.prior);
  j["alpha"] = st.alpha;
  j["trunc"] = st.trunc ? json(*st.trunc) : json(nullptr);
  j["prior"] = params_to_json(st.prior);
  j["processed"] = st.processed;
  json clusters = json::array();
  for (std::size_t k = 0; k < st.clusters.size(); ++k) {
    json c = params_to_json(st.clusters[k]);
    c["soft_count"] = st.soft_counts[k];
    clusters.push_back(std::move(c));
  }
  j["clusters"] = std::move(clusters);
  return j;
}

} // namespace

json nig_to_json(const NigParams& p) {
  return {{"rho", p.rho}, {"nu", p.nu}, {"a", p.a}, {"b", p.b}};
}

NigParams nig_from_json(const json& j) {
  NigParams p{j.at("rho").get<double>(), j.at("nu").get<double>(),
              j.at("a").get<double>(), j.at("b").get<double>()};
  p.validate();
  return p;
}

json niw_to_json(const NiwParams& p) {
  json mean = json::array();
  for (Eigen::Index k = 0; k < p.mean().size(); ++k) mean.push_back(p.mean()(k));
  return {{"mean", mean},
          {"kappa", p.kappa()},
          {"psi", matrix_to_json(p.psi())},
          {"df", p.df()}};
}

NiwParams niw_from_json(const json& j) {
  const auto& m = j.at("mean");
  Eigen::VectorXd mean(static_cast<Eigen::Index>(m.size()));
  for (std::size_t k = 0; k < m.size(); ++k)
    mean(static_cast<Eigen::Index>(k)) = m.at(k).get<double>();
  return NiwParams(std::move(mean), j.at("kappa").get<double>(),
                   matrix_from_json(j.at("psi")), j.at("df").get<double>());
}

template <ConjugateFamily P>
json model_to_json(const AnyFit<P>& fit, const OrderingInfo& ordering) {
  json j;
  j["schema"] = kModelSchema;
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        json st = state_to_json(f.state);
        j.update(st);
        if constexpr (std::is_same_v<F, SugsFit<P>>) {
          j["engine"] = "sugs";
          j["mass"] = static_cast<double>(f.state.processed);
          j["log_pseudo_marginal"] = f.log_pseudo_marginal;
          j["allocations"] = f.allocations;
        } else {
          j["engine"] = "vsugs";
          j["mass"] = f.mass();
          j["lower_bound"] = f.state.lower_bound;
          j["mode"] = f.options.mode == AllocationMode::Soft ? "soft" : "hard";
          json alloc = json::array();
          for (const auto& q : f.allocations) alloc.push_back(q.probs);
          j["allocations"] = std::move(alloc);
        }
      },
      fit);
  j["ordering"] = {{"seed", ordering.seed},
                   {"num_orderings", ordering.num_orderings},
                   {"best_index", ordering.best_index},
                   {"permutation", ordering.permutation}};
  return j;
}

template json model_to_json(const AnyFit<NigParams>&, const OrderingInfo&);
template json model_to_json(const AnyFit<NiwParams>&, const OrderingInfo&);

LoadedModel LoadedModel::from_json(const json& j) {
  if (j.value("schema", std::string()) != kModelSchema)
    throw std::invalid_argument("model: missing or unknown schema tag");
  LoadedModel m;
  m.raw_ = j;
  m.engine_ = j.at("engine").get<std::string>();
  m.dim_ = j.at("dim").get<std::size_t>();
  m.alpha_ = j.at("alpha").get<double>();
  if (!j.at("trunc").is_null()) m.trunc_ = j.at("trunc").get<std::size_t>();
  m.mass_ = j.at("mass").get<double>();
  const std::string family = j.at("family").get<std::string>();
  auto load = [&](auto from, auto tag) {
    using K = decltype(tag);
    Kernels<K> k;
    k.prior.emplace_back(from(j.at("prior")));
    for (const auto& c : j.at("clusters")) {
      k.clusters.emplace_back(from(c));
      m.counts_.push_back(c.at("soft_count").get<double>());
    }
    m.kernels_ = std::move(k);
  };
  if (family == "nig")
    load(nig_from_json, NigPredictiveKernel(NigParams{}));
  else if (family == "niw")
    load(niw_from_json, NiwPredictiveKernel(NiwParams::from_nig(0, 1, 1, 1, 1)));
  else
    throw std::invalid_argument("model: unknown family '" + family + "'");
  return m;
}

std::size_t LoadedModel::num_clusters() const noexcept { return counts_.size(); }

double LoadedModel::log_density(Observation y) const {
  if (y.size() != dim_)
    throw std::invalid_argument("model: observation dimension mismatch");
  std::vector<double> logw;
  const std::size_t slots =
      detail::log_urn_weights(counts_, alpha_, trunc_, mass_, logw);
  return std::visit(
      [&](const auto& k) {
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < slots; ++s) {
          const auto& kern = s < k.clusters.size() ? k.clusters[s] : k.prior[0];
          logw[s] += dpmseq::log_density(kern, y);
          top = std::max(top, logw[s]);
        }
        if (!std::isfinite(top)) return top;
        double sum = 0.0;
        for (std::size_t s = 0; s < slots; ++s) sum += std::exp(logw[s] - top);
        return top + std::log(sum);
      },
      kernels_);
}

double LoadedModel::density(Observation y) const {
  return std::exp(log_density(y));
}

void write_model(std::ostream& os, const json& j, const std::string& comment) {
  os << "// " << comment << '\n' << j.dump(2) << '\n';
}

json read_model(std::istream& is) {
  json j = json::parse(is, nullptr, true, true);
  if (!j.is_object() || j.value("schema", std::string()) != kModelSchema)
    throw std::invalid_argument("model: missing or unknown schema tag");
  return j;
}

} // namespace dpmseq::cli
