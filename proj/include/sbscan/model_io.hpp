// model_io.hpp — JSON model files. Complex numbers are always [re, im]
// pairs; matrices are row-major arrays of rows. rho0 may be given either as
// a full matrix or as {"eigvals": [...], "eigvecs": [[..], ..]} with
// eigenvectors in the columns; the eigendecomposition form is normalized to
// a matrix on load. See docs/model-format.md for the full schema.

#pragma once

#include <sbscan/model.hpp>

#include <json.hpp>

#include <fstream>
#include <string>

namespace sbscan {

using json = nlohmann::json;

namespace io_detail {

inline json complex_to_json(const Complex& z) {
  return json::array({z.real(), z.imag()});
}

inline Complex complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw std::invalid_argument("complex entries must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Mat matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("matrix must be a nonempty array of rows");
  const size_t rows = j.size();
  const size_t cols = j[0].size();
  Mat m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols)
      throw std::invalid_argument("matrix rows have inconsistent lengths");
    for (size_t c = 0; c < cols; ++c)
      m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

inline Vec vector_from_json(const json& j) {
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = complex_from_json(j[i]);
  return v;
}

inline json vector_to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(complex_to_json(v(i)));
  return out;
}

}  // namespace io_detail

struct ModelFile {
  DephasingModel model;
  ScanSettings scan;
};

inline json to_json(const ModelFile& mf) {
  using namespace io_detail;
  json j;
  j["dQ"] = mf.model.d_q;
  j["eps"] = mf.model.eps;
  j["amplitudes"] = vector_to_json(mf.model.amplitudes);
  json envs = json::array();
  for (const auto& env : mf.model.environments) {
    json je;
    je["dim"] = env.dim;
    je["rho0"] = matrix_to_json(env.rho0);
    json vs = json::array();
    for (const auto& v : env.couplings) vs.push_back(matrix_to_json(v));
    je["V"] = std::move(vs);
    envs.push_back(std::move(je));
  }
  j["environments"] = std::move(envs);
  j["scan"] = {{"t_max", mf.scan.t_max},
               {"grid_points", mf.scan.grid_points},
               {"tol_orth", mf.scan.tol_orth},
               {"tol_sep", mf.scan.tol_sep},
               {"refine_iters", mf.scan.refine_iters}};
  return j;
}

inline ModelFile from_json(const json& j) {
  using namespace io_detail;
  ModelFile mf;
  mf.model.d_q = j.at("dQ").get<int>();
  mf.model.eps = j.at("eps").get<std::vector<double>>();
  mf.model.amplitudes = vector_from_json(j.at("amplitudes"));
  for (const auto& je : j.at("environments")) {
    EnvironmentSpec env;
    env.dim = je.at("dim").get<int>();
    const json& jr = je.at("rho0");
    if (jr.is_object()) {
      const auto eigvals = jr.at("eigvals").get<std::vector<double>>();
      const Mat q = matrix_from_json(jr.at("eigvecs"));
      Eigen::VectorXd p(eigvals.size());
      for (size_t n = 0; n < eigvals.size(); ++n) p(n) = eigvals[n];
      env.rho0 = q * p.asDiagonal() * q.adjoint();
    } else {
      env.rho0 = matrix_from_json(jr);
    }
    for (const auto& jv : je.at("V")) env.couplings.push_back(matrix_from_json(jv));
    mf.model.environments.push_back(std::move(env));
  }
  if (j.contains("scan")) {
    const json& js = j.at("scan");
    if (js.contains("t_max")) mf.scan.t_max = js.at("t_max").get<double>();
    if (js.contains("grid_points"))
      mf.scan.grid_points = js.at("grid_points").get<int>();
    if (js.contains("tol_orth")) mf.scan.tol_orth = js.at("tol_orth").get<double>();
    if (js.contains("tol_sep")) mf.scan.tol_sep = js.at("tol_sep").get<double>();
    if (js.contains("refine_iters"))
      mf.scan.refine_iters = js.at("refine_iters").get<int>();
  }
  return mf;
}

inline ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  json j;
  in >> j;
  return from_json(j);
}

inline void save_model_file(const ModelFile& mf, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << to_json(mf).dump(2) << "\n";
}

}  // namespace sbscan
