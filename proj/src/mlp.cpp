#include "lrho/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "lrho/rng.hpp"

namespace lrho {

namespace {

constexpr double kClampLo = 1e-7;
constexpr double kClampHi = 1.0 - 1e-7;

void fit_columns(const std::vector<const Matrix*>& mats, int cols, std::vector<double>& mean, std::vector<double>& sd) {
  mean.assign(cols, 0.0);
  sd.assign(cols, 0.0);
  double count = 0;
  for (const Matrix* m : mats) {
    for (int r = 0; r < m->rows; ++r)
      for (int c = 0; c < cols; ++c) mean[c] += (*m)(r, c);
    count += m->rows;
  }
  if (count == 0) {
    sd.assign(cols, 1.0);
    return;
  }
  for (double& v : mean) v /= count;
  for (const Matrix* m : mats)
    for (int r = 0; r < m->rows; ++r)
      for (int c = 0; c < cols; ++c) sd[c] += ((*m)(r, c) - mean[c]) * ((*m)(r, c) - mean[c]);
  for (double& v : sd) v = std::max(std::sqrt(v / count), Normalizer::kMinStd);
}

void apply(Matrix& m, const std::vector<double>& mean, const std::vector<double>& sd, bool forward) {
  if (static_cast<int>(mean.size()) != m.cols) throw ShapeError("normalizer width does not match features");
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) m(r, c) = forward ? (m(r, c) - mean[c]) / sd[c] : m(r, c) * sd[c] + mean[c];
}

// y = x W^T + b for a batch of rows.
Matrix linear(const Linear& L, const Matrix& x) {
  if (x.cols != L.in) throw ShapeError("layer input width mismatch");
  Matrix y(x.rows, L.out);
  for (int r = 0; r < x.rows; ++r) {
    const double* xr = &x.data[static_cast<std::size_t>(r) * x.cols];
    for (int o = 0; o < L.out; ++o) {
      const double* w = &L.w[static_cast<std::size_t>(o) * L.in];
      double s = L.b[o];
      for (int i = 0; i < L.in; ++i) s += w[i] * xr[i];
      y(r, o) = s;
    }
  }
  return y;
}

Matrix relu(Matrix x) {
  for (double& v : x.data) v = std::max(v, 0.0);
  return x;
}

// Accumulates parameter gradients into g and returns dL/dx.
Matrix linear_back(const Linear& L, const Matrix& x, const Matrix& dy, Linear* g) {
  Matrix dx(x.rows, L.in);
  for (int r = 0; r < x.rows; ++r) {
    const double* xr = &x.data[static_cast<std::size_t>(r) * x.cols];
    double* dxr = &dx.data[static_cast<std::size_t>(r) * dx.cols];
    for (int o = 0; o < L.out; ++o) {
      double d = dy(r, o);
      if (d == 0.0) continue;
      const double* w = &L.w[static_cast<std::size_t>(o) * L.in];
      if (g) {
        double* gw = &g->w[static_cast<std::size_t>(o) * L.in];
        for (int i = 0; i < L.in; ++i) gw[i] += d * xr[i];
        g->b[o] += d;
      }
      for (int i = 0; i < L.in; ++i) dxr[i] += d * w[i];
    }
  }
  return dx;
}

void relu_back(Matrix& d, const Matrix& pre) {
  for (std::size_t i = 0; i < d.data.size(); ++i)
    if (pre.data[i] <= 0.0) d.data[i] = 0.0;
}

void init_linear(Linear& L, Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(L.in));
  for (double& v : L.w) v = (2.0 * rng.uniform01() - 1.0) * bound;
  for (double& v : L.b) v = (2.0 * rng.uniform01() - 1.0) * bound;
}

struct Activations {
  Matrix op_pre, op_h, op_e;
  Matrix m_pre, m_h, m_e;
  std::vector<double> global;
  Matrix fused_in, fuse_pre, fuse_h;
  std::vector<int> rows;
  std::vector<double> logits;
};

Activations run_forward(const MlpModel& model, const StateRecord& rec) {
  rec.validate();
  if (rec.variant != model.variant) throw ShapeError("record variant does not match the model");
  Activations a;
  a.op_pre = linear(model.op1, rec.op_features);
  a.op_h = relu(a.op_pre);
  a.op_e = linear(model.op2, a.op_h);
  a.m_pre = linear(model.m1, rec.machine_features);
  a.m_h = relu(a.m_pre);
  a.m_e = linear(model.m2, a.m_h);
  const int h = model.hidden;
  const int total = a.op_e.rows + a.m_e.rows;
  a.global.assign(h, 0.0);
  for (const Matrix* e : {&a.op_e, &a.m_e})
    for (int r = 0; r < e->rows; ++r)
      for (int c = 0; c < h; ++c) a.global[c] += (*e)(r, c);
  if (total > 0)
    for (double& v : a.global) v /= total;
  a.rows = rec.overlap_rows();
  a.fused_in = Matrix(static_cast<int>(a.rows.size()), 3 * h);
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    int r = a.rows[k];
    int m = rec.prev_machine_index[k];
    for (int c = 0; c < h; ++c) {
      a.fused_in(static_cast<int>(k), c) = a.op_e(r, c);
      a.fused_in(static_cast<int>(k), h + c) = a.m_e(m, c);
      a.fused_in(static_cast<int>(k), 2 * h + c) = a.global[c];
    }
  }
  a.fuse_pre = linear(model.fuse, a.fused_in);
  a.fuse_h = relu(a.fuse_pre);
  Matrix out = linear(model.head, a.fuse_h);
  a.logits = out.data;
  return a;
}

double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

void Normalizer::fit(std::span<const StateRecord> records) {
  if (records.empty()) throw InsufficientDataError("cannot fit a normalizer on zero records");
  std::vector<const Matrix*> ops, machines;
  for (const auto& r : records) {
    ops.push_back(&r.op_features);
    machines.push_back(&r.machine_features);
  }
  fit_columns(ops, records.front().op_features.cols, op_mean, op_std);
  fit_columns(machines, records.front().machine_features.cols, machine_mean, machine_std);
}

StateRecord Normalizer::normalize(const StateRecord& rec) const {
  StateRecord out = rec;
  if (!fitted()) return out;
  apply(out.op_features, op_mean, op_std, true);
  apply(out.machine_features, machine_mean, machine_std, true);
  return out;
}

StateRecord Normalizer::denormalize(const StateRecord& rec) const {
  StateRecord out = rec;
  if (!fitted()) return out;
  apply(out.op_features, op_mean, op_std, false);
  apply(out.machine_features, machine_mean, machine_std, false);
  return out;
}

MlpModel MlpModel::init(FeatureVariant variant, std::uint64_t seed, int hidden) {
  auto [d_o, d_m] = feature_dims(variant);
  MlpModel m;
  m.variant = variant;
  m.hidden = hidden;
  m.op1 = Linear(d_o, hidden);
  m.op2 = Linear(hidden, hidden);
  m.m1 = Linear(d_m, hidden);
  m.m2 = Linear(hidden, hidden);
  m.fuse = Linear(3 * hidden, hidden);
  m.head = Linear(hidden, 1);
  Rng rng(derive_seed(seed, Stream::Training, {0}));
  for (int i = 0; i < kLayers; ++i) init_linear(m.layer(i), rng);
  return m;
}

Linear& MlpModel::layer(int i) {
  return const_cast<Linear&>(static_cast<const MlpModel&>(*this).layer(i));
}

const Linear& MlpModel::layer(int i) const {
  switch (i) {
    case 0: return op1;
    case 1: return op2;
    case 2: return m1;
    case 3: return m2;
    case 4: return fuse;
    case 5: return head;
  }
  throw std::out_of_range("layer index");
}

MlpModel MlpModel::zeros_like() const {
  MlpModel z = *this;
  for (int i = 0; i < kLayers; ++i) {
    std::fill(z.layer(i).w.begin(), z.layer(i).w.end(), 0.0);
    std::fill(z.layer(i).b.begin(), z.layer(i).b.end(), 0.0);
  }
  return z;
}

std::size_t MlpModel::num_parameters() const {
  std::size_t n = 0;
  for (int i = 0; i < kLayers; ++i) n += layer(i).size();
  return n;
}

std::vector<double> forward(const MlpModel& model, const StateRecord& record) {
  Activations a = run_forward(model, record);
  std::vector<double> p;
  p.reserve(a.logits.size());
  for (double z : a.logits) p.push_back(sigmoid(z));
  return p;
}

double loss_sum_and_grad(const MlpModel& model, const StateRecord& record, std::span<const int> labels, double w_pos,
                         MlpModel* grad, LossForm form) {
  if (!(w_pos > 0)) throw ConfigError("w_pos must be positive");
  Activations a = run_forward(model, record);
  const std::size_t n = a.rows.size();
  if (labels.size() != n) throw ShapeError("label count does not match overlap ops");
  const int h = model.hidden;
  double loss = 0.0;
  Matrix dlogit(static_cast<int>(n), 1);
  for (std::size_t k = 0; k < n; ++k) {
    int y = labels[k];
    if (y != 0 && y != 1) throw ConfigError("labels must be 0 or 1");
    double p_raw = sigmoid(a.logits[k]);
    double p = std::clamp(p_raw, kClampLo, kClampHi);
    bool clamped = p != p_raw;
    const double wy = w_pos;
    const double wn = form == LossForm::PositiveWeighted ? 1.0 : w_pos;
    loss += -(wy * y * std::log(p) + wn * (1 - y) * std::log(1.0 - p));
    // d/dz of -[wy*y*log s + wn*(1-y)*log(1-s)] = -wy*y*(1-s) + wn*(1-y)*s
    dlogit(static_cast<int>(k), 0) = clamped ? 0.0 : -wy * y * (1.0 - p) + wn * (1 - y) * p;
  }
  if (!grad || n == 0) return loss;

  Matrix d_fuse_h = linear_back(model.head, a.fuse_h, dlogit, &grad->head);
  relu_back(d_fuse_h, a.fuse_pre);
  Matrix d_in = linear_back(model.fuse, a.fused_in, d_fuse_h, &grad->fuse);

  Matrix d_op_e(a.op_e.rows, h), d_m_e(a.m_e.rows, h);
  std::vector<double> d_global(h, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    int r = a.rows[k];
    int m = record.prev_machine_index[k];
    for (int c = 0; c < h; ++c) {
      d_op_e(r, c) += d_in(static_cast<int>(k), c);
      d_m_e(m, c) += d_in(static_cast<int>(k), h + c);
      d_global[c] += d_in(static_cast<int>(k), 2 * h + c);
    }
  }
  const double inv = 1.0 / (a.op_e.rows + a.m_e.rows);
  for (Matrix* d : {&d_op_e, &d_m_e})
    for (int r = 0; r < d->rows; ++r)
      for (int c = 0; c < h; ++c) (*d)(r, c) += d_global[c] * inv;

  Matrix d_op_h = linear_back(model.op2, a.op_h, d_op_e, &grad->op2);
  relu_back(d_op_h, a.op_pre);
  linear_back(model.op1, record.op_features, d_op_h, &grad->op1);
  Matrix d_m_h = linear_back(model.m2, a.m_h, d_m_e, &grad->m2);
  relu_back(d_m_h, a.m_pre);
  linear_back(model.m1, record.machine_features, d_m_h, &grad->m1);
  return loss;
}

double loss_and_grad(const MlpModel& model, const StateRecord& record, std::span<const int> labels, double w_pos,
                     MlpModel* grad, LossForm form) {
  MlpModel local;
  if (grad) local = model.zeros_like();
  double sum = loss_sum_and_grad(model, record, labels, w_pos, grad ? &local : nullptr, form);
  const double n = static_cast<double>(labels.size());
  if (n == 0) return 0.0;
  if (grad) {
    for (int i = 0; i < MlpModel::kLayers; ++i) {
      auto& g = grad->layer(i);
      const auto& l = local.layer(i);
      for (std::size_t j = 0; j < g.w.size(); ++j) g.w[j] += l.w[j] / n;
      for (std::size_t j = 0; j < g.b.size(); ++j) g.b[j] += l.b[j] / n;
    }
  }
  return sum / n;
}

}  // namespace lrho
