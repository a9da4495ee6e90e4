#pragma once

#include "cmut/matrix.hpp"

#include <json.hpp>

namespace cmut {

using Json = nlohmann::ordered_json;

template <class T>
Json scalar_to_json(const T& x);

template <>
inline Json scalar_to_json<Rational>(const Rational& x) {
  return rat_str(x);
}
template <>
inline Json scalar_to_json<Fp>(const Fp& x) {
  return x.v;
}

template <class T>
T scalar_from_json(const Json& j, const FieldSpec& f) {
  if (j.is_number_integer()) return Scalar<T>::from_int(j.get<std::int64_t>(), f);
  if (j.is_string()) return Scalar<T>::from_rational(parse_rational(j.get<std::string>()), f);
  throw std::invalid_argument("expected a number or a \"p/q\" string, got " + j.dump());
}

template <class T>
Json to_json(const Matrix<T>& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(scalar_to_json(m(i, j)));
    rows.push_back(std::move(r));
  }
  return rows;
}

template <class T>
Json to_json(const Vec<T>& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(scalar_to_json(x));
  return a;
}

// Nested arrays; an empty matrix with nonzero columns needs the expected shape from the caller.
template <class T>
Matrix<T> matrix_from_json(const Json& j, const FieldSpec& f, std::size_t rows, std::size_t cols,
                           const std::string& path) {
  if (!j.is_array() || j.size() != rows)
    throw std::invalid_argument(path + ": expected " + std::to_string(rows) + " rows");
  Matrix<T> m(rows, cols, f);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw std::invalid_argument(path + "[" + std::to_string(i) + "]: expected " + std::to_string(cols) + " entries");
    for (std::size_t c = 0; c < cols; ++c) {
      try {
        m(i, c) = scalar_from_json<T>(j[i][c], f);
      } catch (const std::exception& e) {
        throw std::invalid_argument(path + "[" + std::to_string(i) + "][" + std::to_string(c) + "]: " + e.what());
      }
    }
  }
  return m;
}

template <class T>
Matrix<T> matrix_from_json(const Json& j, const FieldSpec& f, const std::string& path) {
  if (!j.is_array()) throw std::invalid_argument(path + ": expected an array of rows");
  std::size_t rows = j.size(), cols = rows ? j[0].size() : 0;
  return matrix_from_json<T>(j, f, rows, cols, path);
}

template <class T>
Vec<T> vec_from_json(const Json& j, const FieldSpec& f, std::size_t n, const std::string& path) {
  if (!j.is_array() || j.size() != n)
    throw std::invalid_argument(path + ": expected " + std::to_string(n) + " entries");
  Vec<T> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back(scalar_from_json<T>(j[i], f));
  return v;
}

inline const Json& require(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw std::invalid_argument(path + ": missing key '" + key + "'");
  return j.at(key);
}

}  // namespace cmut
