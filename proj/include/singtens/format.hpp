#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace singtens {

/// Thrown when a format is malformed (k < 2, some n_i < 2, overflow).
class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when operands do not agree in shape.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A zero-based multi-index (j_1, ..., j_k). Bounds are checked by the Format
/// that interprets it.
using MultiIndex = std::vector<std::size_t>;

/// Dimension vector n = (n_1, ..., n_k) of a tensor space.
///
/// Linear layout is row-major: the last index varies fastest. Every tensor,
/// linear form and JSON file in this library uses that order.
class Format {
 public:
  Format() = default;

  explicit Format(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) {
      throw FormatError("format needs at least two factors, got " +
                        std::to_string(dims_.size()));
    }
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (dims_[i] < 2) {
        throw FormatError("factor " + std::to_string(i + 1) +
                          " has dimension " + std::to_string(dims_[i]) +
                          "; every n_i must be >= 2");
      }
    }
    strides_.assign(dims_.size(), 1);
    std::size_t total = 1;
    for (std::size_t i = dims_.size(); i-- > 0;) {
      strides_[i] = total;
      if (total > std::numeric_limits<std::size_t>::max() / dims_[i]) {
        throw FormatError("format size overflows addressable memory");
      }
      total *= dims_[i];
    }
    total_ = total;
  }

  Format(std::initializer_list<std::size_t> dims)
      : Format(std::vector<std::size_t>(dims)) {}

  /// Parses "n1,n2,...,nk". Whitespace around entries is ignored.
  static Format parse(std::string_view text) {
    std::vector<std::size_t> dims;
    std::string item;
    std::stringstream ss{std::string(text)};
    while (std::getline(ss, item, ',')) {
      const auto first = item.find_first_not_of(" \t");
      const auto last = item.find_last_not_of(" \t");
      if (first == std::string::npos) {
        throw FormatError("empty entry in format string '" + std::string(text) + "'");
      }
      item = item.substr(first, last - first + 1);
      if (!std::all_of(item.begin(), item.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw FormatError("non-numeric entry '" + item + "' in format string");
      }
      if (item.size() > 9) throw FormatError("entry '" + item + "' is too large");
      dims.push_back(std::stoul(item));
    }
    return Format(std::move(dims));
  }

  std::size_t order() const { return dims_.size(); }
  std::size_t dim(std::size_t i) const { return dims_.at(i); }
  std::span<const std::size_t> dims() const { return dims_; }
  const std::vector<std::size_t>& dim_vector() const { return dims_; }
  std::size_t total_size() const { return total_; }
  std::size_t stride(std::size_t i) const { return strides_.at(i); }
  std::size_t last_dim() const { return dims_.back(); }

  /// Number of mode-k fibers, i.e. prod_{i<k} n_i.
  std::size_t fiber_count() const { return total_ / dims_.back(); }

  void check_index(std::span<const std::size_t> idx) const {
    if (idx.size() != dims_.size()) {
      throw DimensionMismatch("multi-index has " + std::to_string(idx.size()) +
                              " entries, format has order " + std::to_string(dims_.size()));
    }
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] >= dims_[i]) {
        throw std::out_of_range("index " + std::to_string(idx[i]) + " out of range for factor " +
                                std::to_string(i + 1) + " of size " + std::to_string(dims_[i]));
      }
    }
  }

  std::size_t linear_index(std::span<const std::size_t> idx) const {
    check_index(idx);
    std::size_t lin = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) lin += idx[i] * strides_[i];
    return lin;
  }

  MultiIndex multi_index(std::size_t linear) const {
    if (linear >= total_) throw std::out_of_range("linear index out of range");
    MultiIndex idx(dims_.size());
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      idx[i] = linear / strides_[i];
      linear %= strides_[i];
    }
    return idx;
  }

  /// Same leading factors, last factor replaced by n.
  Format with_last(std::size_t n) const {
    auto d = dims_;
    d.back() = n;
    return Format(std::move(d));
  }

  /// Dims sorted ascending (a permutation of the same tensor space).
  Format sorted() const {
    auto d = dims_;
    std::sort(d.begin(), d.end());
    return Format(std::move(d));
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(dims_[i]);
    }
    return s;
  }

  bool operator==(const Format& other) const { return dims_ == other.dims_; }

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> strides_;
  std::size_t total_ = 0;
};

/// Calls f(linear, idx) for every multi-index in layout order.
template <class F>
void for_each_index(const Format& format, F&& f) {
  const std::size_t k = format.order();
  MultiIndex idx(k, 0);
  for (std::size_t lin = 0; lin < format.total_size(); ++lin) {
    f(lin, static_cast<const MultiIndex&>(idx));
    for (std::size_t i = k; i-- > 0;) {
      if (++idx[i] < format.dim(i)) break;
      idx[i] = 0;
    }
  }
}

}  // namespace singtens
