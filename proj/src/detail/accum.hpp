#pragma once

#include <cmath>
#include <complex>

namespace factlab::detail {

// Neumaier variant of Kahan summation: tracks the low-order bits lost when
// adding terms of mixed magnitude.
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) noexcept {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }

  void merge(const NeumaierSum& o) noexcept {
    add(o.sum);
    add(o.comp);
  }

  double value() const noexcept { return sum + comp; }
};

struct ComplexSum {
  NeumaierSum re;
  NeumaierSum im;

  void add(std::complex<double> z) noexcept {
    re.add(z.real());
    im.add(z.imag());
  }

  void merge(const ComplexSum& o) noexcept {
    re.merge(o.re);
    im.merge(o.im);
  }

  std::complex<double> value() const noexcept { return {re.value(), im.value()}; }
};

}  // namespace factlab::detail
