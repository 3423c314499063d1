#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace chartbench {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Method { dmap, isomap, umap };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

/// An N x d coordinate matrix produced by one of the embedding methods.
template <typename Scalar>
struct BasicEmbedding {
  Matrix<Scalar> U;
  Method method = Method::dmap;
  std::map<std::string, std::string> meta;

  Index d() const { return U.cols(); }
  Index size() const { return U.rows(); }
};

using Embedding = BasicEmbedding<double>;

}  // namespace chartbench
