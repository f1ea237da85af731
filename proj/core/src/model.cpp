#include "basisguard/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>

#include "basisguard/error.hpp"
#include "basisguard/parallel.hpp"
#include "basisguard/rng.hpp"

namespace basisguard {

namespace {

void kaiming_uniform(std::vector<double>& w, int fan_in, Rng& rng) {
  double bound = std::sqrt(6.0 / fan_in);
  for (double& v : w) v = rng.uniform(-bound, bound);
}

}  // namespace

Classifier::Classifier(int input_h, int input_w, int input_c, int num_classes,
                       std::uint64_t seed)
    : in_h_(input_h), in_w_(input_w), in_c_(input_c), classes_(num_classes) {
  if (input_h < 4 || input_w < 4)
    throw Error("BadSize", "input must be at least 4x4 for two pool stages");

  conv1.in_ch = input_c;
  conv1.out_ch = 16;
  conv1.w.resize(static_cast<std::size_t>(16) * 9 * input_c);
  conv1.b.assign(16, 0.0);

  conv2.in_ch = 16;
  conv2.out_ch = 32;
  conv2.w.resize(static_cast<std::size_t>(32) * 9 * 16);
  conv2.b.assign(32, 0.0);

  fc1.in_dim = pool2_h() * pool2_w() * 32;
  fc1.out_dim = 128;
  fc1.w.resize(static_cast<std::size_t>(128) * fc1.in_dim);
  fc1.b.assign(128, 0.0);

  fc2.in_dim = 128;
  fc2.out_dim = num_classes;
  fc2.w.resize(static_cast<std::size_t>(num_classes) * 128);
  fc2.b.assign(num_classes, 0.0);

  Rng r0 = Rng::substream(seed, 0);
  Rng r1 = Rng::substream(seed, 1);
  Rng r2 = Rng::substream(seed, 2);
  Rng r3 = Rng::substream(seed, 3);
  kaiming_uniform(conv1.w, 9 * conv1.in_ch, r0);
  kaiming_uniform(conv2.w, 9 * conv2.in_ch, r1);
  kaiming_uniform(fc1.w, fc1.in_dim, r2);
  kaiming_uniform(fc2.w, fc2.in_dim, r3);
}

std::string Classifier::arch_string() const {
  return "bgnet-v1;in=" + std::to_string(in_h_) + "x" + std::to_string(in_w_) +
         "x" + std::to_string(in_c_) + ";classes=" + std::to_string(classes_) +
         ";conv3x3x16-pool2-conv3x3x32-pool2-fc128-fc" + std::to_string(classes_);
}

void ParamGrads::resize_like(const Classifier& m) {
  cw1.assign(m.conv1.w.size(), 0.0);
  cb1.assign(m.conv1.b.size(), 0.0);
  cw2.assign(m.conv2.w.size(), 0.0);
  cb2.assign(m.conv2.b.size(), 0.0);
  fw1.assign(m.fc1.w.size(), 0.0);
  fb1.assign(m.fc1.b.size(), 0.0);
  fw2.assign(m.fc2.w.size(), 0.0);
  fb2.assign(m.fc2.b.size(), 0.0);
}

void ParamGrads::clear() {
  auto zero = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
  zero(cw1); zero(cb1); zero(cw2); zero(cb2);
  zero(fw1); zero(fb1); zero(fw2); zero(fb2);
}

namespace {

// 3x3 same-padding convolution over channel-last maps.
void conv_forward(const std::vector<double>& in, int h, int w, int ic,
                  const ConvLayer& layer, std::vector<double>& out) {
  const int oc = layer.out_ch;
  out.assign(static_cast<std::size_t>(h) * w * oc, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double* o = &out[(static_cast<std::size_t>(y) * w + x) * oc];
      for (int f = 0; f < oc; ++f) o[f] = layer.b[f];
      for (int ky = 0; ky < 3; ++ky) {
        int yy = y + ky - 1;
        if (yy < 0 || yy >= h) continue;
        for (int kx = 0; kx < 3; ++kx) {
          int xx = x + kx - 1;
          if (xx < 0 || xx >= w) continue;
          const double* src = &in[(static_cast<std::size_t>(yy) * w + xx) * ic];
          for (int f = 0; f < oc; ++f) {
            const double* wp = &layer.w[((static_cast<std::size_t>(f) * 3 + ky) * 3 + kx) * ic];
            double acc = 0.0;
            for (int c = 0; c < ic; ++c) acc += wp[c] * src[c];
            o[f] += acc;
          }
        }
      }
    }
}

// Gradients of the same convolution: d_in (optional) and d_layer (optional).
void conv_backward(const std::vector<double>& in, int h, int w, int ic,
                   const ConvLayer& layer, const std::vector<double>& dout,
                   std::vector<double>* din, std::vector<double>* dw,
                   std::vector<double>* db) {
  const int oc = layer.out_ch;
  if (din) din->assign(in.size(), 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double* go = &dout[(static_cast<std::size_t>(y) * w + x) * oc];
      if (db)
        for (int f = 0; f < oc; ++f) (*db)[f] += go[f];
      for (int ky = 0; ky < 3; ++ky) {
        int yy = y + ky - 1;
        if (yy < 0 || yy >= h) continue;
        for (int kx = 0; kx < 3; ++kx) {
          int xx = x + kx - 1;
          if (xx < 0 || xx >= w) continue;
          const std::size_t in_base = (static_cast<std::size_t>(yy) * w + xx) * ic;
          for (int f = 0; f < oc; ++f) {
            const double g = go[f];
            if (g == 0.0) continue;
            const std::size_t w_base = ((static_cast<std::size_t>(f) * 3 + ky) * 3 + kx) * ic;
            if (dw)
              for (int c = 0; c < ic; ++c) (*dw)[w_base + c] += g * in[in_base + c];
            if (din)
              for (int c = 0; c < ic; ++c) (*din)[in_base + c] += g * layer.w[w_base + c];
          }
        }
      }
    }
}

void relu_inplace(std::vector<double>& v) {
  for (double& x : v)
    if (x < 0.0) x = 0.0;
}

// 2x2 max pooling with stride 2; odd trailing rows/cols are dropped. Ties
// resolve to the first (row-major) element so the backward route is
// deterministic.
void maxpool_forward(const std::vector<double>& in, int h, int w, int ch,
                     std::vector<double>& out, std::vector<int>& idx) {
  const int oh = h / 2, ow = w / 2;
  out.assign(static_cast<std::size_t>(oh) * ow * ch, 0.0);
  idx.assign(out.size(), 0);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x)
      for (int c = 0; c < ch; ++c) {
        double best = -1e300;
        int best_at = 0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            int at = ((2 * y + dy) * w + (2 * x + dx)) * ch + c;
            if (in[at] > best) {
              best = in[at];
              best_at = at;
            }
          }
        std::size_t o = (static_cast<std::size_t>(y) * ow + x) * ch + c;
        out[o] = best;
        idx[o] = best_at;
      }
}

void maxpool_backward(const std::vector<double>& dout, const std::vector<int>& idx,
                      std::size_t in_size, std::vector<double>& din) {
  din.assign(in_size, 0.0);
  for (std::size_t i = 0; i < dout.size(); ++i) din[idx[i]] += dout[i];
}

void dense_forward(const std::vector<double>& in, const DenseLayer& layer,
                   std::vector<double>& out) {
  out.resize(layer.out_dim);
  for (int o = 0; o < layer.out_dim; ++o) {
    const double* wp = &layer.w[static_cast<std::size_t>(o) * layer.in_dim];
    double acc = layer.b[o];
    for (int i = 0; i < layer.in_dim; ++i) acc += wp[i] * in[i];
    out[o] = acc;
  }
}

void dense_backward(const std::vector<double>& in, const DenseLayer& layer,
                    const std::vector<double>& dout, std::vector<double>* din,
                    std::vector<double>* dw, std::vector<double>* db) {
  if (din) din->assign(layer.in_dim, 0.0);
  for (int o = 0; o < layer.out_dim; ++o) {
    double g = dout[o];
    if (db) (*db)[o] += g;
    const std::size_t base = static_cast<std::size_t>(o) * layer.in_dim;
    if (dw)
      for (int i = 0; i < layer.in_dim; ++i) (*dw)[base + i] += g * in[i];
    if (din && g != 0.0)
      for (int i = 0; i < layer.in_dim; ++i) (*din)[i] += g * layer.w[base + i];
  }
}

}  // namespace

std::vector<double> forward(const Classifier& model, const ImageTensor& x,
                            GradientTape* tape) {
  if (x.height != model.input_height() || x.width != model.input_width() ||
      x.channels != model.input_channels())
    throw Error("ShapeMismatch", "input shape does not match the model");

  GradientTape local;
  GradientTape& t = tape ? *tape : local;
  t.input = x.data;

  conv_forward(t.input, model.in_h_, model.in_w_, model.in_c_, model.conv1, t.a1);
  std::vector<double> r1 = t.a1;
  relu_inplace(r1);
  maxpool_forward(r1, model.in_h_, model.in_w_, 16, t.p1, t.idx1);

  conv_forward(t.p1, model.pool1_h(), model.pool1_w(), 16, model.conv2, t.a2);
  std::vector<double> r2 = t.a2;
  relu_inplace(r2);
  maxpool_forward(r2, model.pool1_h(), model.pool1_w(), 32, t.p2, t.idx2);

  dense_forward(t.p2, model.fc1, t.h1);
  t.hr1 = t.h1;
  relu_inplace(t.hr1);
  dense_forward(t.hr1, model.fc2, t.logits);
  return t.logits;
}

std::vector<double> softmax(std::span<const double> logits) {
  double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

int argmax(std::span<const double> v) {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = static_cast<int>(i);
  return best;
}

double loss(const Classifier& model, const ImageTensor& x, int y) {
  if (y < 0 || y >= model.num_classes())
    throw Error("BadLabel", "label out of range");
  std::vector<double> logits = forward(model, x);
  double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  return m + std::log(sum) - logits[y];
}

void backward(const Classifier& model, const GradientTape& tape,
              std::span<const double> dlogits, std::vector<double>* dx,
              ParamGrads* grads) {
  std::vector<double> dl(dlogits.begin(), dlogits.end());

  std::vector<double> dhr;
  dense_backward(tape.hr1, model.fc2, dl, &dhr, grads ? &grads->fw2 : nullptr,
                 grads ? &grads->fb2 : nullptr);
  for (std::size_t i = 0; i < dhr.size(); ++i)
    if (tape.h1[i] <= 0.0) dhr[i] = 0.0;

  std::vector<double> dflat;
  dense_backward(tape.p2, model.fc1, dhr, &dflat, grads ? &grads->fw1 : nullptr,
                 grads ? &grads->fb1 : nullptr);

  std::vector<double> dr2;
  maxpool_backward(dflat, tape.idx2, tape.a2.size(), dr2);
  for (std::size_t i = 0; i < dr2.size(); ++i)
    if (tape.a2[i] <= 0.0) dr2[i] = 0.0;

  std::vector<double> dp1;
  conv_backward(tape.p1, model.pool1_h(), model.pool1_w(), 16, model.conv2, dr2,
                &dp1, grads ? &grads->cw2 : nullptr, grads ? &grads->cb2 : nullptr);

  std::vector<double> dr1;
  maxpool_backward(dp1, tape.idx1, tape.a1.size(), dr1);
  for (std::size_t i = 0; i < dr1.size(); ++i)
    if (tape.a1[i] <= 0.0) dr1[i] = 0.0;

  conv_backward(tape.input, model.in_h_, model.in_w_, model.in_c_, model.conv1,
                dr1, dx, grads ? &grads->cw1 : nullptr,
                grads ? &grads->cb1 : nullptr);
}

std::vector<double> input_gradient(const Classifier& model, const ImageTensor& x,
                                   int y) {
  if (y < 0 || y >= model.num_classes())
    throw Error("BadLabel", "label out of range");
  GradientTape tape;
  forward(model, x, &tape);
  std::vector<double> dlogits = softmax(tape.logits);
  dlogits[y] -= 1.0;
  std::vector<double> dx;
  backward(model, tape, dlogits, &dx, nullptr);
  return dx;
}

std::vector<double> input_gradient_logits(const Classifier& model,
                                          const ImageTensor& x,
                                          std::span<const double> dlogits) {
  GradientTape tape;
  forward(model, x, &tape);
  std::vector<double> dx;
  backward(model, tape, dlogits, &dx, nullptr);
  return dx;
}

namespace {

struct ParamView {
  std::vector<double>* p;
  std::vector<double>* g;
  std::vector<double>* v;  // momentum buffer
};

double batch_accuracy(const Classifier& model, std::span<const ImageTensor> images,
                      std::span<const int> labels, int threads) {
  if (images.empty()) return 0.0;
  std::vector<int> correct(images.size(), 0);
  parallel_for(static_cast<int>(images.size()), threads, [&](int i) {
    std::vector<double> logits = forward(model, images[i]);
    correct[i] = argmax(logits) == labels[i] ? 1 : 0;
  });
  return std::accumulate(correct.begin(), correct.end(), 0) /
         static_cast<double>(images.size());
}

}  // namespace

TrainReport train(Classifier& model, std::span<const ImageTensor> train_images,
                  std::span<const int> train_labels,
                  std::span<const ImageTensor> test_images,
                  std::span<const int> test_labels, const TrainConfig& config) {
  if (train_images.empty()) throw Error("EmptyDataset", "no training examples");
  if (train_images.size() != train_labels.size())
    throw Error("ShapeMismatch", "image/label count mismatch");

  ParamGrads momentum;
  momentum.resize_like(model);

  const int n = static_cast<int>(train_images.size());
  const int batch = std::min(config.batch, n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  // One gradient buffer per batch slot; summed in example order so the
  // result is independent of how slots were scheduled across threads.
  std::vector<ParamGrads> slot(batch);
  for (auto& s : slot) s.resize_like(model);
  ParamGrads total;
  total.resize_like(model);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng shuffle_rng = Rng::substream(config.seed, 1000 + epoch);
    shuffle_rng.shuffle(order);

    for (int start = 0; start < n; start += batch) {
      int count = std::min(batch, n - start);
      parallel_for(count, config.threads, [&](int bi) {
        const ImageTensor& img = train_images[order[start + bi]];
        int label = train_labels[order[start + bi]];
        GradientTape tape;
        forward(model, img, &tape);
        std::vector<double> dlogits = softmax(tape.logits);
        dlogits[label] -= 1.0;
        slot[bi].clear();
        backward(model, tape, dlogits, nullptr, &slot[bi]);
      });

      total.clear();
      auto views = [](ParamGrads& g) {
        return std::array<std::vector<double>*, 8>{&g.cw1, &g.cb1, &g.cw2, &g.cb2,
                                                   &g.fw1, &g.fb1, &g.fw2, &g.fb2};
      };
      for (int bi = 0; bi < count; ++bi) {
        auto src = views(slot[bi]);
        auto dst = views(total);
        for (int t = 0; t < 8; ++t)
          for (std::size_t i = 0; i < src[t]->size(); ++i)
            (*dst[t])[i] += (*src[t])[i];
      }

      const double scale = 1.0 / count;
      std::array<std::vector<double>*, 8> params{
          &model.conv1.w, &model.conv1.b, &model.conv2.w, &model.conv2.b,
          &model.fc1.w,   &model.fc1.b,   &model.fc2.w,   &model.fc2.b};
      auto grads = views(total);
      auto vel = views(momentum);
      for (int t = 0; t < 8; ++t)
        for (std::size_t i = 0; i < params[t]->size(); ++i) {
          double g = (*grads[t])[i] * scale;
          double v = config.momentum * (*vel[t])[i] - config.lr * g;
          (*vel[t])[i] = v;
          (*params[t])[i] += v;
        }
    }

    if (config.verbose) {
      double acc = batch_accuracy(model, test_images, test_labels, config.threads);
      std::fprintf(stderr, "epoch %d/%d: test accuracy %.4f\n", epoch + 1,
                   config.epochs, acc);
    }
  }

  TrainReport report;
  report.epochs = config.epochs;
  report.train_accuracy = batch_accuracy(model, train_images, train_labels, config.threads);
  report.test_accuracy = batch_accuracy(model, test_images, test_labels, config.threads);
  return report;
}

namespace {

void push_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void push_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

void push_string(std::vector<std::uint8_t>& out, const std::string& s) {
  push_u32(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

void push_tensor(std::vector<std::uint8_t>& out, const std::string& name,
                 const std::vector<double>& data, std::vector<std::uint32_t> shape) {
  push_string(out, name);
  out.push_back(0);  // dtype tag 0 = f64
  out.push_back(static_cast<std::uint8_t>(shape.size()));
  for (std::uint32_t d : shape) push_u32(out, d);
  for (double v : data) push_f64(out, v);
}

class Reader {
 public:
  Reader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(p_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return p_[pos_++];
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(p_[pos_ + i]) << (8 * i);
    pos_ += 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str() {
    std::uint32_t len = u32();
    need(len);
    std::string s(reinterpret_cast<const char*>(p_ + pos_), len);
    pos_ += len;
    return s;
  }
  void raw(char* dst, std::size_t len) {
    need(len);
    std::memcpy(dst, p_ + pos_, len);
    pos_ += len;
  }

 private:
  void need(std::size_t k) {
    if (pos_ + k > n_) throw Error("BadCheckpoint", "truncated checkpoint");
  }
  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

void save_checkpoint(const std::string& path, const Classifier& model) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'B', 'G', 'C', 'K'});
  push_u32(out, kCheckpointVersion);
  push_string(out, model.arch_string());
  push_u32(out, 8);

  auto u = [](int v) { return static_cast<std::uint32_t>(v); };
  push_tensor(out, "conv1.w", model.conv1.w, {u(model.conv1.out_ch), 3, 3, u(model.conv1.in_ch)});
  push_tensor(out, "conv1.b", model.conv1.b, {u(model.conv1.out_ch)});
  push_tensor(out, "conv2.w", model.conv2.w, {u(model.conv2.out_ch), 3, 3, u(model.conv2.in_ch)});
  push_tensor(out, "conv2.b", model.conv2.b, {u(model.conv2.out_ch)});
  push_tensor(out, "fc1.w", model.fc1.w, {u(model.fc1.out_dim), u(model.fc1.in_dim)});
  push_tensor(out, "fc1.b", model.fc1.b, {u(model.fc1.out_dim)});
  push_tensor(out, "fc2.w", model.fc2.w, {u(model.fc2.out_dim), u(model.fc2.in_dim)});
  push_tensor(out, "fc2.b", model.fc2.b, {u(model.fc2.out_dim)});

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("IoError", "cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("IoError", "short write on " + path);
}

Classifier load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("IoError", "cannot open " + path);
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(f)),
                                std::istreambuf_iterator<char>());
  if (buf.size() < 8 || std::memcmp(buf.data(), "BGCK", 4) != 0)
    throw Error("BadCheckpoint", "bad magic in " + path);

  Reader r(buf.data() + 4, buf.size() - 4);
  std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw Error("BadCheckpoint", "unsupported version " + std::to_string(version));
  std::string arch = r.str();

  int h = 0, w = 0, c = 0, classes = 0;
  if (std::sscanf(arch.c_str(), "bgnet-v1;in=%dx%dx%d;classes=%d", &h, &w, &c,
                  &classes) != 4)
    throw Error("BadCheckpoint", "unrecognized architecture: " + arch);

  Classifier model(h, w, c, classes, 0);
  if (model.arch_string() != arch)
    throw Error("BadCheckpoint", "architecture descriptor mismatch");

  std::uint32_t tensor_count = r.u32();
  if (tensor_count != 8) throw Error("BadCheckpoint", "unexpected tensor count");

  auto expect = [&](const std::string& name, std::vector<double>& dst,
                    std::vector<std::uint32_t> shape) {
    if (r.str() != name) throw Error("BadCheckpoint", "unexpected tensor order");
    if (r.u8() != 0) throw Error("BadCheckpoint", "unsupported dtype");
    std::uint8_t ndim = r.u8();
    if (ndim != shape.size()) throw Error("BadCheckpoint", "rank mismatch for " + name);
    std::size_t total = 1;
    for (std::uint32_t want : shape) {
      std::uint32_t got = r.u32();
      if (got != want) throw Error("BadCheckpoint", "shape mismatch for " + name);
      total *= want;
    }
    if (total != dst.size()) throw Error("BadCheckpoint", "size mismatch for " + name);
    for (double& v : dst) v = r.f64();
  };

  auto u = [](int v) { return static_cast<std::uint32_t>(v); };
  expect("conv1.w", model.conv1.w, {u(model.conv1.out_ch), 3, 3, u(model.conv1.in_ch)});
  expect("conv1.b", model.conv1.b, {u(model.conv1.out_ch)});
  expect("conv2.w", model.conv2.w, {u(model.conv2.out_ch), 3, 3, u(model.conv2.in_ch)});
  expect("conv2.b", model.conv2.b, {u(model.conv2.out_ch)});
  expect("fc1.w", model.fc1.w, {u(model.fc1.out_dim), u(model.fc1.in_dim)});
  expect("fc1.b", model.fc1.b, {u(model.fc1.out_dim)});
  expect("fc2.w", model.fc2.w, {u(model.fc2.out_dim), u(model.fc2.in_dim)});
  expect("fc2.b", model.fc2.b, {u(model.fc2.out_dim)});
  return model;
}

}  // namespace basisguard
