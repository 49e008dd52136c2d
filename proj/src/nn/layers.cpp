#include "twistcnn/nn/layers.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

namespace twistcnn::nn {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

}  // namespace

// ---- Conv ----------------------------------------------------------------------------------

template <typename T>
Conv<T>::Conv(std::size_t in_channels, std::size_t out_channels, std::size_t kh, std::size_t kw)
    : in_(in_channels),
      out_(out_channels),
      kh_(kh),
      kw_(kw),
      weight_("weight", out_channels * in_channels * kh * kw),
      bias_("bias", out_channels) {
  if (kh % 2 == 0 || kw % 2 == 0) throw std::invalid_argument("Conv: kernel extents must be odd");
}

template <typename T>
std::string Conv<T>::name() const {
  return "conv" + std::to_string(kh_) + "x" + std::to_string(kw_) + "(" + std::to_string(in_) + "->" +
         std::to_string(out_) + ")";
}

template <typename T>
Shape Conv<T>::output_shape(const Shape& in) const {
  if (in.c != in_) throw std::invalid_argument(name() + ": input has " + std::to_string(in.c) + " channels");
  return {in.n, out_, in.h, in.w};
}

template <typename T>
void Conv<T>::im2col(std::span<const T> x, std::size_t h, std::size_t w) {
  const std::size_t hw = h * w;
  const auto ph = static_cast<std::ptrdiff_t>(kh_ / 2), pw = static_cast<std::ptrdiff_t>(kw_ / 2);
  col_.resize(in_ * kh_ * kw_ * hw);
  T* dst = col_.data();
  for (std::size_t c = 0; c < in_; ++c)
    for (std::size_t i = 0; i < kh_; ++i)
      for (std::size_t j = 0; j < kw_; ++j) {
        const std::ptrdiff_t di = static_cast<std::ptrdiff_t>(i) - ph, dj = static_cast<std::ptrdiff_t>(j) - pw;
        for (std::size_t oh = 0; oh < h; ++oh, dst += w) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh) + di;
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) {
            std::fill(dst, dst + w, T{0});
            continue;
          }
          const T* src = x.data() + c * hw + static_cast<std::size_t>(ih) * w;
          for (std::size_t ow = 0; ow < w; ++ow) {
            const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow) + dj;
            dst[ow] = (iw < 0 || iw >= static_cast<std::ptrdiff_t>(w)) ? T{0} : src[iw];
          }
        }
      }
}

template <typename T>
void Conv<T>::col2im(std::span<T> dx, std::size_t h, std::size_t w) const {
  const std::size_t hw = h * w;
  const auto ph = static_cast<std::ptrdiff_t>(kh_ / 2), pw = static_cast<std::ptrdiff_t>(kw_ / 2);
  std::fill(dx.begin(), dx.end(), T{0});
  const T* src = col_.data();
  for (std::size_t c = 0; c < in_; ++c)
    for (std::size_t i = 0; i < kh_; ++i)
      for (std::size_t j = 0; j < kw_; ++j) {
        const std::ptrdiff_t di = static_cast<std::ptrdiff_t>(i) - ph, dj = static_cast<std::ptrdiff_t>(j) - pw;
        for (std::size_t oh = 0; oh < h; ++oh, src += w) {
          const std::ptrdiff_t ih = static_cast<std::ptrdiff_t>(oh) + di;
          if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) continue;
          T* dst = dx.data() + c * hw + static_cast<std::size_t>(ih) * w;
          for (std::size_t ow = 0; ow < w; ++ow) {
            const std::ptrdiff_t iw = static_cast<std::ptrdiff_t>(ow) + dj;
            if (iw >= 0 && iw < static_cast<std::ptrdiff_t>(w)) dst[iw] += src[ow];
          }
        }
      }
}

template <typename T>
Tensor<T> Conv<T>::forward(const Tensor<T>& x, Mode) {
  Tensor<T> y(output_shape(x.shape));
  const std::size_t hw = x.shape.plane(), k = in_ * kh_ * kw_;
  ConstMatMap<T> wmat(weight_.value.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(k));
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> b(bias_.value.data(), static_cast<Eigen::Index>(out_));
  for (std::size_t n = 0; n < x.shape.n; ++n) {
    im2col(x.sample(n), x.shape.h, x.shape.w);
    ConstMatMap<T> col(col_.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(hw));
    MatMap<T> out(y.sample(n).data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(hw));
    out.noalias() = wmat * col;
    out.colwise() += b;
  }
  input_ = x;
  return y;
}

template <typename T>
Tensor<T> Conv<T>::backward(const Tensor<T>& grad_out) {
  const Shape& s = input_.shape;
  Tensor<T> dx(s);
  const std::size_t hw = s.plane(), k = in_ * kh_ * kw_;
  ConstMatMap<T> wmat(weight_.value.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(k));
  MatMap<T> dw(weight_.grad.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(k));
  Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>> db(bias_.grad.data(), static_cast<Eigen::Index>(out_));
  for (std::size_t n = 0; n < s.n; ++n) {
    ConstMatMap<T> dy(grad_out.sample(n).data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(hw));
    im2col(input_.sample(n), s.h, s.w);
    MatMap<T> col(col_.data(), static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(hw));
    dw.noalias() += dy * col.transpose();
    for (std::size_t o = 0; o < out_; ++o) {
      // scalar loop: Eigen's vectorised reductions peel by address, which would make the
      // summation order (and hence the bits) depend on where the buffers were allocated
      const T* row = grad_out.sample(n).data() + o * hw;
      T s{0};
      for (std::size_t i = 0; i < hw; ++i) s += row[i];
      db[static_cast<Eigen::Index>(o)] += s;
    }
    col.noalias() = wmat.transpose() * dy;
    col2im(dx.sample(n), s.h, s.w);
  }
  return dx;
}

// ---- BatchNorm -----------------------------------------------------------------------------

template <typename T>
BatchNorm<T>::BatchNorm(std::size_t channels, double eps, double momentum)
    : channels_(channels),
      eps_(eps),
      momentum_(momentum),
      gamma_("gamma", channels),
      beta_("beta", channels),
      running_mean_(channels, T{0}),
      running_var_(channels, T{1}) {
  std::fill(gamma_.value.begin(), gamma_.value.end(), T{1});
}

template <typename T>
Tensor<T> BatchNorm<T>::forward(const Tensor<T>& x, Mode mode) {
  if (x.shape.c != channels_) throw std::invalid_argument(name() + ": channel mismatch " + x.shape.str());
  mode_ = mode;
  const std::size_t plane = x.shape.plane(), count = x.shape.n * plane;
  Tensor<T> y(x.shape);
  xhat_ = Tensor<T>(x.shape);
  inv_std_.assign(channels_, T{0});
  if (mode == Mode::train && x.shape.n < 2)
    throw std::invalid_argument(name() + ": training mode needs a batch of at least 2 samples");
  for (std::size_t c = 0; c < channels_; ++c) {
    double mean, var;
    if (mode == Mode::train) {
      double s = 0.0;
      for (std::size_t n = 0; n < x.shape.n; ++n) {
        const T* p = x.data.data() + (n * channels_ + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) s += p[i];
      }
      mean = s / static_cast<double>(count);
      double ss = 0.0;
      for (std::size_t n = 0; n < x.shape.n; ++n) {
        const T* p = x.data.data() + (n * channels_ + c) * plane;
        for (std::size_t i = 0; i < plane; ++i) ss += (p[i] - mean) * (p[i] - mean);
      }
      var = ss / static_cast<double>(count);
      double unbiased = count > 1 ? ss / static_cast<double>(count - 1) : var;
      running_mean_[c] = static_cast<T>((1.0 - momentum_) * running_mean_[c] + momentum_ * mean);
      running_var_[c] = static_cast<T>((1.0 - momentum_) * running_var_[c] + momentum_ * unbiased);
    } else {
      mean = running_mean_[c];
      var = running_var_[c];
    }
    const T inv = static_cast<T>(1.0 / std::sqrt(var + eps_));
    inv_std_[c] = inv;
    const T g = gamma_.value[c], b = beta_.value[c], m = static_cast<T>(mean);
    for (std::size_t n = 0; n < x.shape.n; ++n) {
      const std::size_t off = (n * channels_ + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        T h = (x.data[off + i] - m) * inv;
        xhat_.data[off + i] = h;
        y.data[off + i] = g * h + b;
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> BatchNorm<T>::backward(const Tensor<T>& grad_out) {
  const Shape& s = xhat_.shape;
  const std::size_t plane = s.plane();
  const double count = static_cast<double>(s.n * plane);
  Tensor<T> dx(s);
  for (std::size_t c = 0; c < channels_; ++c) {
    double dgamma = 0.0, dbeta = 0.0;
    for (std::size_t n = 0; n < s.n; ++n) {
      const std::size_t off = (n * channels_ + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        dgamma += grad_out.data[off + i] * xhat_.data[off + i];
        dbeta += grad_out.data[off + i];
      }
    }
    gamma_.grad[c] += static_cast<T>(dgamma);
    beta_.grad[c] += static_cast<T>(dbeta);
    const T g = gamma_.value[c], inv = inv_std_[c];
    for (std::size_t n = 0; n < s.n; ++n) {
      const std::size_t off = (n * channels_ + c) * plane;
      for (std::size_t i = 0; i < plane; ++i) {
        if (mode_ == Mode::train)
          dx.data[off + i] = static_cast<T>(g * inv / count *
                                            (count * grad_out.data[off + i] - dbeta - xhat_.data[off + i] * dgamma));
        else
          dx.data[off + i] = g * inv * grad_out.data[off + i];
      }
    }
  }
  return dx;
}

// ---- ReLU ----------------------------------------------------------------------------------

template <typename T>
Tensor<T> Relu<T>::forward(const Tensor<T>& x, Mode) {
  Tensor<T> y(x.shape);
  shape_ = x.shape;
  positive_.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    positive_[i] = x.data[i] > T{0};
    y.data[i] = positive_[i] ? x.data[i] : T{0};
  }
  return y;
}

template <typename T>
Tensor<T> Relu<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> dx(shape_);
  for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] = positive_[i] ? grad_out.data[i] : T{0};
  return dx;
}

// ---- MaxPool -------------------------------------------------------------------------------

template <typename T>
Shape MaxPool<T>::output_shape(const Shape& in) const {
  Shape out{in.n, in.c, in.h / kh_, in.w / kw_};
  if (out.h == 0 || out.w == 0) throw std::invalid_argument(name() + ": input " + in.str() + " smaller than window");
  return out;
}

template <typename T>
Tensor<T> MaxPool<T>::forward(const Tensor<T>& x, Mode) {
  const Shape os = output_shape(x.shape);
  Tensor<T> y(os);
  in_shape_ = x.shape;
  argmax_.resize(y.size());
  std::size_t o = 0;
  for (std::size_t nc = 0; nc < x.shape.n * x.shape.c; ++nc) {
    const T* plane = x.data.data() + nc * x.shape.plane();
    for (std::size_t oh = 0; oh < os.h; ++oh)
      for (std::size_t ow = 0; ow < os.w; ++ow, ++o) {
        std::size_t best = oh * kh_ * x.shape.w + ow * kw_;
        for (std::size_t i = 0; i < kh_; ++i)
          for (std::size_t j = 0; j < kw_; ++j) {
            std::size_t idx = (oh * kh_ + i) * x.shape.w + ow * kw_ + j;
            if (plane[idx] > plane[best]) best = idx;
          }
        y.data[o] = plane[best];
        argmax_[o] = static_cast<std::uint32_t>(best);
      }
  }
  return y;
}

template <typename T>
Tensor<T> MaxPool<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> dx(in_shape_);
  const std::size_t out_plane = grad_out.shape.plane();
  for (std::size_t o = 0; o < grad_out.size(); ++o) {
    std::size_t nc = o / out_plane;
    dx.data[nc * in_shape_.plane() + argmax_[o]] += grad_out.data[o];
  }
  return dx;
}

// ---- GlobalAvgPool -------------------------------------------------------------------------

template <typename T>
Tensor<T> GlobalAvgPool<T>::forward(const Tensor<T>& x, Mode) {
  in_shape_ = x.shape;
  Tensor<T> y(output_shape(x.shape));
  const std::size_t plane = x.shape.plane();
  for (std::size_t nc = 0; nc < x.shape.n * x.shape.c; ++nc) {
    double s = 0.0;
    for (std::size_t i = 0; i < plane; ++i) s += x.data[nc * plane + i];
    y.data[nc] = static_cast<T>(s / static_cast<double>(plane));
  }
  return y;
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::backward(const Tensor<T>& grad_out) {
  Tensor<T> dx(in_shape_);
  const std::size_t plane = in_shape_.plane();
  for (std::size_t nc = 0; nc < in_shape_.n * in_shape_.c; ++nc) {
    T g = grad_out.data[nc] / static_cast<T>(plane);
    std::fill_n(dx.data.begin() + static_cast<std::ptrdiff_t>(nc * plane), plane, g);
  }
  return dx;
}

// ---- Dense ---------------------------------------------------------------------------------

template <typename T>
Dense<T>::Dense(std::size_t in, std::size_t out)
    : in_(in), out_(out), weight_("weight", out * in), bias_("bias", out) {}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& x, Mode) {
  if (x.shape.sample_size() != in_) throw std::invalid_argument(name() + ": input " + x.shape.str());
  input_ = x;
  Tensor<T> y(output_shape(x.shape));
  const auto n = static_cast<Eigen::Index>(x.shape.n);
  ConstMatMap<T> xm(x.data.data(), n, static_cast<Eigen::Index>(in_));
  ConstMatMap<T> w(weight_.value.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
  MatMap<T> ym(y.data.data(), n, static_cast<Eigen::Index>(out_));
  Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> b(bias_.value.data(), static_cast<Eigen::Index>(out_));
  ym.noalias() = xm * w.transpose();
  ym.rowwise() += b;
  return y;
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& grad_out) {
  const auto n = static_cast<Eigen::Index>(input_.shape.n);
  Tensor<T> dx(input_.shape);
  ConstMatMap<T> xm(input_.data.data(), n, static_cast<Eigen::Index>(in_));
  ConstMatMap<T> dy(grad_out.data.data(), n, static_cast<Eigen::Index>(out_));
  ConstMatMap<T> w(weight_.value.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
  MatMap<T> dw(weight_.grad.data(), static_cast<Eigen::Index>(out_), static_cast<Eigen::Index>(in_));
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> db(bias_.grad.data(), static_cast<Eigen::Index>(out_));
  MatMap<T> dxm(dx.data.data(), n, static_cast<Eigen::Index>(in_));
  dw.noalias() += dy.transpose() * xm;
  for (Eigen::Index r = 0; r < n; ++r)
    for (std::size_t o = 0; o < out_; ++o) db[static_cast<Eigen::Index>(o)] += grad_out.data[static_cast<std::size_t>(r) * out_ + o];
  dxm.noalias() = dy * w;
  return dx;
}

// ---- Dropout -------------------------------------------------------------------------------

template <typename T>
Tensor<T> Dropout<T>::forward(const Tensor<T>& x, Mode mode) {
  mode_ = mode;
  if (mode == Mode::eval) return x;
  Tensor<T> y(x.shape);
  mask_.resize(x.size());
  const T scale = static_cast<T>(1.0 / (1.0 - rate_));
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask_[i] = rng_.uniform() < rate_ ? T{0} : scale;
    y.data[i] = x.data[i] * mask_[i];
  }
  return y;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const Tensor<T>& grad_out) {
  if (mode_ == Mode::eval) return grad_out;
  Tensor<T> dx(grad_out.shape);
  for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] = grad_out.data[i] * mask_[i];
  return dx;
}

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& s, std::uint64_t seed) {
  switch (s.kind) {
    case LayerKind::conv: return std::make_unique<Conv<T>>(s.in, s.out, s.kh, s.kw);
    case LayerKind::batchnorm: return std::make_unique<BatchNorm<T>>(s.in, s.eps, s.momentum);
    case LayerKind::relu: return std::make_unique<Relu<T>>();
    case LayerKind::maxpool: return std::make_unique<MaxPool<T>>(s.kh, s.kw);
    case LayerKind::global_avg_pool: return std::make_unique<GlobalAvgPool<T>>();
    case LayerKind::dense: return std::make_unique<Dense<T>>(s.in, s.out);
    case LayerKind::dropout: return std::make_unique<Dropout<T>>(s.rate, seed);
  }
  throw std::invalid_argument("make_layer: unknown layer kind " + std::to_string(static_cast<int>(s.kind)));
}

template class Conv<float>;
template class Conv<double>;
template class BatchNorm<float>;
template class BatchNorm<double>;
template class Relu<float>;
template class Relu<double>;
template class MaxPool<float>;
template class MaxPool<double>;
template class GlobalAvgPool<float>;
template class GlobalAvgPool<double>;
template class Dense<float>;
template class Dense<double>;
template class Dropout<float>;
template class Dropout<double>;
template std::unique_ptr<Layer<float>> make_layer<float>(const LayerSpec&, std::uint64_t);
template std::unique_ptr<Layer<double>> make_layer<double>(const LayerSpec&, std::uint64_t);

}  // namespace twistcnn::nn
