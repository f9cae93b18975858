#include "switchflow/types.hpp"

#include "switchflow/error.hpp"

#include <string>

namespace switchflow {

StateVector::StateVector(Vector values, Layout layout)
    : values_(std::move(values)), layout_(layout) {
  if (layout_.size() != size()) {
    fail(ErrorKind::LayoutMismatch, "state of size " + std::to_string(size()) +
                                        " does not match layout " +
                                        std::to_string(layout_.agents) + "x" +
                                        std::to_string(layout_.dim));
  }
  if (!values_.allFinite()) fail(ErrorKind::InvalidArgument, "state has non-finite entries");
}

StateVector::StateVector(Vector values)
    : StateVector(values, Layout{1, static_cast<std::size_t>(values.size())}) {}

Vector StateVector::agent_mean() const {
  Vector mean = Vector::Zero(static_cast<Eigen::Index>(layout_.dim));
  for (std::size_t i = 0; i < layout_.agents; ++i) mean += block(i);
  if (layout_.agents > 0) mean /= static_cast<double>(layout_.agents);
  return mean;
}

Vector to_vector(const std::vector<double>& values) {
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::vector<double> to_std(const Vector& values) {
  return {values.data(), values.data() + values.size()};
}

}  // namespace switchflow
