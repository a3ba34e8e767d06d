#include "tensor.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace grbf {

DenseTensor::DenseTensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
  strides_.resize(shape_.size());
  std::size_t total = 1;
  for (std::size_t m = shape_.size(); m-- > 0;) {
    if (shape_[m] == 0) throw std::invalid_argument("tensor extent must be positive");
    strides_[m] = total;
    total *= shape_[m];
  }
  data_.assign(total, 0.0);
}

DenseTensor DenseTensor::scalar(double value) {
  DenseTensor t;
  t.data_[0] = value;
  return t;
}

std::size_t DenseTensor::offset(std::span<const std::size_t> idx) const {
  if (idx.size() != shape_.size()) throw std::invalid_argument("index order mismatch");
  std::size_t off = 0;
  for (std::size_t m = 0; m < idx.size(); ++m) {
    if (idx[m] >= shape_[m]) throw std::out_of_range("tensor index out of range");
    off += idx[m] * strides_[m];
  }
  return off;
}

double& DenseTensor::at(std::initializer_list<std::size_t> idx) {
  return data_[offset(std::span<const std::size_t>(idx.begin(), idx.size()))];
}

double DenseTensor::at(std::initializer_list<std::size_t> idx) const {
  return data_[offset(std::span<const std::size_t>(idx.begin(), idx.size()))];
}

double DenseTensor::value() const {
  if (!shape_.empty()) throw std::invalid_argument("value() requires an order-0 tensor");
  return data_[0];
}

DenseTensor& DenseTensor::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

DenseTensor& DenseTensor::add_scaled(const DenseTensor& other, double s) {
  if (other.shape_ != shape_) throw std::invalid_argument("tensor shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
  return *this;
}

bool next_index(std::span<const std::size_t> shape, std::span<std::size_t> idx) {
  for (std::size_t m = shape.size(); m-- > 0;) {
    if (++idx[m] < shape[m]) return true;
    idx[m] = 0;
  }
  return false;
}

DenseTensor outer(const DenseTensor& a, const DenseTensor& b) {
  std::vector<std::size_t> shape = a.shape();
  shape.insert(shape.end(), b.shape().begin(), b.shape().end());
  DenseTensor r(std::move(shape));
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < nb; ++j) r[i * nb + j] = a[i] * b[j];
  return r;
}

DenseTensor outer_power(std::span<const double> v, std::size_t k) {
  if (v.empty()) throw std::invalid_argument("outer_power of an empty vector");
  DenseTensor r = DenseTensor::scalar(1.0);
  DenseTensor vt(std::vector<std::size_t>{v.size()});
  std::copy(v.begin(), v.end(), vt.data().begin());
  for (std::size_t i = 0; i < k; ++i) r = outer(r, vt);
  return r;
}

DenseTensor symmetrize(const DenseTensor& t) {
  const std::size_t p = t.order();
  if (p <= 1) return t;
  const std::size_t n = t.shape()[0];
  for (std::size_t e : t.shape())
    if (e != n) throw std::invalid_argument("symmetrize requires equal extents");

  DenseTensor r(t.shape());
  std::vector<std::size_t> perm(p);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> idx(p, 0), pidx(p);
  std::size_t count = 0;
  do {
    std::fill(idx.begin(), idx.end(), 0);
    do {
      for (std::size_t m = 0; m < p; ++m) pidx[m] = idx[perm[m]];
      r.at(idx) += t.at(pidx);
    } while (next_index(t.shape(), idx));
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  r *= 1.0 / static_cast<double>(count);
  return r;
}

DenseTensor contract_even(const DenseTensor& a, const DenseTensor& b) {
  const std::size_t order = a.order();
  if (order == 0 || order % 2 != 0) throw std::invalid_argument("contract_even requires even positive order");
  const std::size_t p = order / 2;
  if (b.order() != p) throw std::invalid_argument("contract_even operand order mismatch");
  std::vector<std::size_t> kept(p), summed(p);
  for (std::size_t m = 0; m < p; ++m) {
    kept[m] = a.shape()[2 * m];
    summed[m] = a.shape()[2 * m + 1];
    if (b.shape()[m] != summed[m]) throw std::invalid_argument("contract_even extent mismatch");
  }

  DenseTensor r{std::vector<std::size_t>(kept)};
  std::vector<std::size_t> ki(p, 0);
  std::vector<std::size_t> si(p);
  std::vector<std::size_t> ai(order);
  std::size_t rflat = 0;
  do {
    double acc = 0.0;
    std::fill(si.begin(), si.end(), 0);
    do {
      for (std::size_t m = 0; m < p; ++m) {
        ai[2 * m] = ki[m];
        ai[2 * m + 1] = si[m];
      }
      acc += a.at(ai) * b.at(si);
    } while (next_index(summed, si));
    r[rflat++] = acc;
  } while (next_index(kept, ki));
  return r;
}

DenseTensor partial_trace(const DenseTensor& t, std::size_t mode_a, std::size_t mode_b) {
  const std::size_t p = t.order();
  if (mode_a == mode_b || mode_a >= p || mode_b >= p)
    throw std::invalid_argument("partial_trace needs two distinct valid modes");
  if (t.shape()[mode_a] != t.shape()[mode_b])
    throw std::invalid_argument("partial_trace extents differ");
  const std::size_t n = t.shape()[mode_a];

  std::vector<std::size_t> rest;
  for (std::size_t m = 0; m < p; ++m)
    if (m != mode_a && m != mode_b) rest.push_back(m);

  std::vector<std::size_t> rshape;
  for (std::size_t m : rest) rshape.push_back(t.shape()[m]);
  DenseTensor r{std::move(rshape)};

  std::vector<std::size_t> ri(rest.size(), 0), ti(p);
  std::size_t rflat = 0;
  do {
    for (std::size_t m = 0; m < rest.size(); ++m) ti[rest[m]] = ri[m];
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      ti[mode_a] = k;
      ti[mode_b] = k;
      acc += t.at(ti);
    }
    r[rflat++] = acc;
  } while (next_index(r.shape(), ri));
  return r;
}

DenseTensor place_modes(const DenseTensor& t, std::span<const std::size_t> dest) {
  const std::size_t p = t.order();
  if (dest.size() != p) throw std::invalid_argument("place_modes permutation size mismatch");
  std::vector<bool> seen(p, false);
  for (std::size_t d : dest) {
    if (d >= p || seen[d]) throw std::invalid_argument("place_modes needs a permutation");
    seen[d] = true;
  }
  std::vector<std::size_t> rshape(p);
  for (std::size_t m = 0; m < p; ++m) rshape[dest[m]] = t.shape()[m];
  DenseTensor r{std::move(rshape)};

  std::vector<std::size_t> ti(p, 0), ri(p);
  if (p == 0) {
    r[0] = t[0];
    return r;
  }
  do {
    for (std::size_t m = 0; m < p; ++m) ri[dest[m]] = ti[m];
    r.at(ri) = t.at(ti);
  } while (next_index(t.shape(), ti));
  return r;
}

}  // namespace grbf
