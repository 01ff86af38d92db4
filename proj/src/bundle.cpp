#include "wgmres/bundle.hpp"

#include "wgmres/analysis.hpp"

namespace wgmres::lab {

using nlohmann::json;

json matrix_to_json(const Mat& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back({a(i, j).real(), a(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

cplx scalar_from_json(const json& e) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return {e[0].get<double>(), e[1].get<double>()};
  throw Error(ErrorKind::InvalidConfig, "scalar must be a number or a [re, im] pair");
}

}  // namespace

Mat matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw Error(ErrorKind::InvalidConfig, "matrix must be nested rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (j[i].size() != static_cast<std::size_t>(cols)) throw Error(ErrorKind::InvalidConfig, "ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) a(i, c) = scalar_from_json(j[i][c]);
  }
  num::require_finite(a, "matrix");
  return a;
}

json vector_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

Vec vector_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::InvalidConfig, "vector must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = scalar_from_json(j[i]);
  return v;
}

json real_to_json(const RVec& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

RVec real_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorKind::InvalidConfig, "real vector must be an array");
  auto v = j.get<std::vector<double>>();
  return Eigen::Map<RVec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json to_json(const forge::ForgedInstance& inst) {
  json j;
  j["provenance"] = inst.provenance;
  j["seed"] = inst.seed;
  j["A"] = matrix_to_json(inst.a);
  j["b"] = vector_to_json(inst.b);
  if (inst.m) j["M"] = matrix_to_json(*inst.m);
  if (inst.h) j["H"] = matrix_to_json(*inst.h);
  if (inst.w) j["W"] = matrix_to_json(*inst.w);
  if (inst.t) j["T"] = matrix_to_json(*inst.t);
  json p;
  p["g"] = real_to_json(inst.prescribed.g);
  if (inst.prescribed.g_tilde) p["g_tilde"] = real_to_json(*inst.prescribed.g_tilde);
  if (inst.prescribed.g_right) p["g_right"] = real_to_json(*inst.prescribed.g_right);
  if (inst.prescribed.g_left) p["g_left"] = real_to_json(*inst.prescribed.g_left);
  p["lambda"] = vector_to_json(inst.prescribed.lambda);
  j["prescribed"] = p;
  return j;
}

forge::ForgedInstance instance_from_json(const json& j) {
  forge::ForgedInstance inst;
  try {
    inst.provenance = j.value("provenance", std::string());
    inst.seed = j.value("seed", std::uint64_t{0});
    inst.a = matrix_from_json(j.at("A"));
    inst.b = vector_from_json(j.at("b"));
    if (j.contains("M")) inst.m = matrix_from_json(j["M"]);
    if (j.contains("H")) inst.h = matrix_from_json(j["H"]);
    if (j.contains("W")) inst.w = matrix_from_json(j["W"]);
    if (j.contains("T")) inst.t = matrix_from_json(j["T"]);
    const json& p = j.at("prescribed");
    inst.prescribed.g = real_from_json(p.at("g"));
    if (p.contains("g_tilde")) inst.prescribed.g_tilde = real_from_json(p["g_tilde"]);
    if (p.contains("g_right")) inst.prescribed.g_right = real_from_json(p["g_right"]);
    if (p.contains("g_left")) inst.prescribed.g_left = real_from_json(p["g_left"]);
    inst.prescribed.lambda = vector_from_json(p.at("lambda"));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("bundle: ") + e.what());
  }
  const auto n = inst.a.rows();
  if (inst.a.cols() != n || inst.b.size() != n) throw Error(ErrorKind::DimensionMismatch, "bundle dimensions");
  return inst;
}

namespace {

json check(const std::string& name, double value, double tol) {
  return {{"name", name}, {"value", value}, {"tol", tol}, {"pass", value <= tol}};
}

}  // namespace

json verify_instance(const forge::ForgedInstance& inst) {
  const auto n = static_cast<int>(inst.a.rows());
  const auto id = krylov::WeightMatrix::identity(n);
  json checks = json::array();
  const auto& pr = inst.prescribed;
  const double lmax = pr.lambda.size() ? pr.lambda.cwiseAbs().maxCoeff() : 1.0;

  if (inst.h && pr.g_right && pr.g_left) {
    auto right = krylov::preconditioned_gmres(inst.a, inst.b, std::nullopt, *inst.h);
    auto left = krylov::preconditioned_gmres(inst.a, inst.b, *inst.h, std::nullopt);
    checks.push_back(check("right_curve", analysis::curve_deviation(right.minimized, curves::g_to_curve(*pr.g_right)), 1e-7));
    checks.push_back(check("left_curve", analysis::curve_deviation(left.minimized, curves::g_to_curve(*pr.g_left)), 1e-7));
    if (pr.lambda.size() == n)
      checks.push_back(check("spectrum_AH", num::eigen_pairing_error(pr.lambda, num::general_eig(Mat(inst.a * *inst.h))) / lmax, 1e-8));
  } else {
    auto ti = krylov::mgmres(inst.a, inst.b, id);
    checks.push_back(check("I_curve", analysis::curve_deviation(ti.residual_norms, curves::g_to_curve(pr.g)), 1e-8));
    if (inst.m && pr.g_tilde) {
      krylov::WeightMatrix m(*inst.m);
      auto tm = krylov::mgmres(inst.a, inst.b, m);
      checks.push_back(check("M_curve", analysis::curve_deviation(tm.residual_norms, curves::g_to_curve(*pr.g_tilde)), 1e-7));
      checks.push_back({{"name", "kappa_M"}, {"value", m.cond()}, {"tol", nullptr}, {"pass", true}});
    }
    if (pr.lambda.size() == n)
      checks.push_back(check("spectrum_A", num::eigen_pairing_error(pr.lambda, num::general_eig(inst.a)) / lmax, 1e-8));
  }
  bool pass = true;
  for (const auto& c : checks) pass = pass && c["pass"].get<bool>();
  return {{"provenance", inst.provenance}, {"checks", checks}, {"pass", pass}};
}

}  // namespace wgmres::lab
