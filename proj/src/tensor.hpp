#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace grbf {

// Dense tensor of arbitrary order with row-major layout. Order 0 is a scalar.
class DenseTensor {
public:
  DenseTensor() : data_(1, 0.0) {}
  explicit DenseTensor(std::vector<std::size_t> shape);
  static DenseTensor scalar(double value);

  std::size_t order() const { return shape_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  std::size_t offset(std::span<const std::size_t> idx) const;
  double& at(std::span<const std::size_t> idx) { return data_[offset(idx)]; }
  double at(std::span<const std::size_t> idx) const { return data_[offset(idx)]; }
  double& at(std::initializer_list<std::size_t> idx);
  double at(std::initializer_list<std::size_t> idx) const;

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  // Scalar access; only valid for an order-0 tensor.
  double value() const;

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  DenseTensor& operator*=(double s);
  DenseTensor& add_scaled(const DenseTensor& other, double s);

private:
  std::vector<std::size_t> shape_;
  std::vector<std::size_t> strides_;
  std::vector<double> data_;
};

// Advances a row-major multi-index over `shape`; returns false once exhausted.
// `idx` must start zero-filled with idx.size() == shape.size().
bool next_index(std::span<const std::size_t> shape, std::span<std::size_t> idx);

// Outer (tensor) product; result order is the sum of the input orders.
DenseTensor outer(const DenseTensor& a, const DenseTensor& b);

// k-fold outer power v ⊗ ... ⊗ v of a vector; k = 0 gives the scalar 1.
DenseTensor outer_power(std::span<const double> v, std::size_t k);

// Averages a tensor over all permutations of its modes. All extents must match.
DenseTensor symmetrize(const DenseTensor& t);

// Contraction of an even-order tensor A (order 2p) against B (order p) over
// A's 2nd, 4th, ..., 2p-th modes:
//   R(i1,i3,...,i_{2p-1}) = sum over (i2,i4,...) of A(i1,...,i2p) B(i2,i4,...).
DenseTensor contract_even(const DenseTensor& a, const DenseTensor& b);

// Trace over two modes (0-based, mode_a != mode_b, equal extents); result has
// order reduced by two, remaining modes keep their relative order.
DenseTensor partial_trace(const DenseTensor& t, std::size_t mode_a, std::size_t mode_b);

// Rearranges modes: mode m of the input becomes mode dest[m] of the result.
// `dest` must be a permutation of {0, ..., order-1}.
DenseTensor place_modes(const DenseTensor& t, std::span<const std::size_t> dest);

}  // namespace grbf
