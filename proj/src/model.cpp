#include "osr/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "osr/error.hpp"
#include "osr/threading.hpp"

namespace osr {

namespace {

using json = nlohmann::json;

// C += A * B, row-major, A (m x k), B (k x n), C (m x n)
void gemm_acc(Matrix& c, const Matrix& a, const Matrix& b) {
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (int k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
}

// C += A^T * B, A (k x m), B (k x n), C (m x n)
void gemm_acc_at_b(Matrix& c, const Matrix& a, const Matrix& b) {
    for (int k = 0; k < a.rows; ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (int i = 0; i < a.cols; ++i) {
            const double aki = arow[i];
            if (aki == 0.0) continue;
            double* crow = c.row(i);
            for (int j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
        }
    }
}

double uniform_sym(Rng& rng, double a) { return rng.uniform(-a, a); }

void glorot_fill(Matrix& w, Rng& rng) {
    const double a = std::sqrt(6.0 / (w.rows + w.cols));
    for (double& v : w.data) v = uniform_sym(rng, a);
}

// Batched forward pass over B patches; row b of each per-step matrix belongs
// to patch b.
struct BatchCache {
    int batch = 0;
    std::vector<Matrix> inputs;  // per step: B x cols
    std::vector<Matrix> preact;  // per step: B x hidden
    std::vector<Matrix> states;  // per step: B x hidden
    std::vector<Matrix> outputs; // per step: B x P
};

BatchCache forward_batch(const RnnModel& m, const std::vector<const AnalysisPatch*>& patches) {
    const int B = static_cast<int>(patches.size());
    const int steps = m.geom.rows, cols = m.geom.cols, hid = m.hidden(), p = m.output_cols();
    BatchCache cache;
    cache.batch = B;
    cache.inputs.reserve(steps);
    Matrix z_prev(B, hid, 0.0);
    for (int t = 0; t < steps; ++t) {
        Matrix y(B, cols);
        const int krow = steps - 1 - t; // time runs opposite to Definition-1 k
        for (int b = 0; b < B; ++b) std::memcpy(y.row(b), patches[b]->data.row(krow), sizeof(double) * cols);

        Matrix a(B, hid);
        for (int b = 0; b < B; ++b) std::memcpy(a.row(b), m.bias.data(), sizeof(double) * hid);
        gemm_acc(a, y, m.w_zy);
        gemm_acc(a, z_prev, m.w_zz);

        Matrix z(B, hid);
        for (size_t i = 0; i < a.data.size(); ++i) z.data[i] = a.data[i] > 0.0 ? a.data[i] : 0.0;

        Matrix x(B, p, 0.0);
        gemm_acc(x, z, m.w_xz);

        cache.inputs.push_back(std::move(y));
        cache.preact.push_back(std::move(a));
        z_prev = z;
        cache.states.push_back(std::move(z));
        cache.outputs.push_back(std::move(x));
    }
    return cache;
}

// dL/dx for the mean-per-element content loss; returns the summed loss over
// the batch as well.
double output_grad(const Matrix& x, const Matrix& target_rows, LossKind kind, double inv_elems, Matrix& dx) {
    double loss = 0.0;
    for (size_t i = 0; i < x.data.size(); ++i) {
        const double d = x.data[i] - target_rows.data[i];
        if (kind == LossKind::L2) {
            loss += d * d;
            dx.data[i] = 2.0 * d * inv_elems;
        } else {
            loss += std::abs(d);
            dx.data[i] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) * inv_elems;
        }
    }
    return loss * inv_elems;
}

// BPTT through the batch; grads accumulate the SUM over patches of the
// per-patch loss gradient. dX holds dL/dx per step (already scaled).
void backward_batch(const RnnModel& m, const BatchCache& cache, const std::vector<Matrix>& dx, ModelGrads& grads) {
    const int B = cache.batch;
    const int steps = m.geom.rows, hid = m.hidden();
    const Matrix w_xz_t = transpose(m.w_xz);
    const Matrix w_zz_t = transpose(m.w_zz);

    Matrix delta_next(B, hid, 0.0); // dL/da_{t+1}
    for (int t = steps - 1; t >= 0; --t) {
        // dL/dz_t = dx_t . W_xz^T + delta_{t+1} . W_zz^T
        Matrix gz(B, hid, 0.0);
        gemm_acc(gz, dx[t], w_xz_t);
        if (t < steps - 1) gemm_acc(gz, delta_next, w_zz_t);

        // through ReLU
        Matrix delta(B, hid);
        const Matrix& a = cache.preact[t];
        for (size_t i = 0; i < gz.data.size(); ++i) delta.data[i] = a.data[i] > 0.0 ? gz.data[i] : 0.0;

        gemm_acc_at_b(grads.w_xz, cache.states[t], dx[t]);
        gemm_acc_at_b(grads.w_zy, cache.inputs[t], delta);
        if (t > 0) gemm_acc_at_b(grads.w_zz, cache.states[t - 1], delta);
        for (int b = 0; b < B; ++b) {
            const double* drow = delta.row(b);
            for (int j = 0; j < hid; ++j) grads.bias[j] += drow[j];
        }
        delta_next = std::move(delta);
    }
}

std::vector<TensorRef> model_refs(RnnModel& m, const ModelGrads& g) {
    return {
        {m.w_zy.data.data(), g.w_zy.data.data(), m.w_zy.data.size()},
        {m.w_zz.data.data(), g.w_zz.data.data(), m.w_zz.data.size()},
        {m.bias.data(), g.bias.data(), m.bias.size()},
        {m.w_xz.data.data(), g.w_xz.data.data(), m.w_xz.data.size()},
    };
}

// ---- discriminator internals ----

struct DiscCache {
    std::vector<double> h;     // hidden after ReLU
    std::vector<double> preh;  // hidden pre-activation
    double logit = 0.0;
};

DiscCache disc_forward(const Discriminator& d, const std::vector<double>& x) {
    DiscCache c;
    c.preh = matvec_t(d.w1, x);
    for (size_t i = 0; i < c.preh.size(); ++i) c.preh[i] += d.b1[i];
    c.h.resize(c.preh.size());
    for (size_t i = 0; i < c.preh.size(); ++i) c.h[i] = c.preh[i] > 0.0 ? c.preh[i] : 0.0;
    c.logit = d.b2[0];
    for (int i = 0; i < d.w2.rows; ++i) c.logit += d.w2.at(i, 0) * c.h[i];
    return c;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

struct DiscGrads {
    Matrix w1;
    std::vector<double> b1;
    Matrix w2;
    std::vector<double> b2;

    explicit DiscGrads(const Discriminator& d)
        : w1(d.w1.rows, d.w1.cols, 0.0), b1(d.b1.size(), 0.0), w2(d.w2.rows, 1, 0.0), b2(1, 0.0) {}
};

// Accumulates parameter gradients for dL/dlogit and optionally returns
// dL/dinput.
void disc_backward(const Discriminator& d, const std::vector<double>& x, const DiscCache& c, double dlogit,
                   DiscGrads* grads, std::vector<double>* dinput) {
    const int hid = d.hidden();
    std::vector<double> dh(hid);
    for (int i = 0; i < hid; ++i) dh[i] = (c.preh[i] > 0.0) ? dlogit * d.w2.at(i, 0) : 0.0;
    if (grads) {
        grads->b2[0] += dlogit;
        for (int i = 0; i < hid; ++i) grads->w2.at(i, 0) += dlogit * c.h[i];
        for (int i = 0; i < hid; ++i) grads->b1[i] += dh[i];
        outer_acc(grads->w1, x, dh);
    }
    if (dinput) {
        *dinput = matvec(d.w1, dh);
    }
}

std::vector<TensorRef> disc_refs(Discriminator& d, const DiscGrads& g) {
    return {
        {d.w1.data.data(), g.w1.data.data(), d.w1.data.size()},
        {d.b1.data(), g.b1.data(), d.b1.size()},
        {d.w2.data.data(), g.w2.data.data(), d.w2.data.size()},
        {d.b2.data(), g.b2.data(), d.b2.size()},
    };
}

double safe_log(double v) { return std::log(std::max(v, 1e-12)); }

// ---- checkpoint helpers ----

void put_u32(std::ofstream& out, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF), static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF), static_cast<unsigned char>((v >> 24) & 0xFF)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError("checkpoint: truncated file");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) | (static_cast<uint32_t>(b[2]) << 16) |
           (static_cast<uint32_t>(b[3]) << 24);
}

void write_tensor(std::ofstream& out, const std::string& name, const Matrix& t) {
    put_u32(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u32(out, static_cast<uint32_t>(t.rows));
    put_u32(out, static_cast<uint32_t>(t.cols));
    std::vector<float> buf(t.data.size());
    for (size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(t.data[i]);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

struct NamedTensor {
    std::string name;
    Matrix value;
};

NamedTensor read_tensor(std::ifstream& in) {
    const uint32_t name_len = get_u32(in);
    if (name_len > 4096) throw FormatError("checkpoint: implausible tensor name length");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const uint32_t rows = get_u32(in);
    const uint32_t cols = get_u32(in);
    if (!in || rows == 0 || cols == 0 || static_cast<uint64_t>(rows) * cols > (1ULL << 28))
        throw FormatError("checkpoint: implausible tensor dims");
    std::vector<float> buf(static_cast<size_t>(rows) * cols);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in) throw FormatError("checkpoint: truncated tensor data");
    NamedTensor t{std::move(name), Matrix(static_cast<int>(rows), static_cast<int>(cols))};
    for (size_t i = 0; i < buf.size(); ++i) t.value.data[i] = static_cast<double>(buf[i]);
    return t;
}

} // namespace

RnnModel init_model(const PatchGeometry& geom, int hidden, Rng& rng) {
    if (hidden < 1) throw ContractError("hidden size must be >= 1");
    RnnModel m;
    m.geom = geom;
    m.w_zy = Matrix(geom.cols, hidden);
    m.w_zz = Matrix(hidden, hidden);
    m.bias.assign(hidden, 0.0);
    m.w_xz = Matrix(hidden, geom.output_cols());
    glorot_fill(m.w_zy, rng);
    glorot_fill(m.w_zz, rng);
    glorot_fill(m.w_xz, rng);
    return m;
}

std::vector<double> rnn_cell_step(const RnnModel& m, const std::vector<double>& y_t,
                                  const std::vector<double>& z_prev) {
    if (static_cast<int>(y_t.size()) != m.w_zy.rows) throw ShapeError("rnn_cell_step: input length mismatch");
    if (static_cast<int>(z_prev.size()) != m.hidden()) throw ShapeError("rnn_cell_step: state length mismatch");
    std::vector<double> a = matvec_t(m.w_zy, y_t);
    const std::vector<double> rec = matvec_t(m.w_zz, z_prev);
    for (int i = 0; i < m.hidden(); ++i) {
        a[i] += rec[i] + m.bias[i];
        if (a[i] < 0.0) a[i] = 0.0;
    }
    return a;
}

ForwardResult forward(const RnnModel& m, const AnalysisPatch& patch) {
    if (patch.data.rows != m.geom.rows || patch.data.cols != m.geom.cols)
        throw ShapeError("forward: patch dims do not match model geometry");
    const std::vector<const AnalysisPatch*> one{&patch};
    BatchCache cache = forward_batch(m, one);
    ForwardResult r;
    r.states = Matrix(m.geom.rows, m.hidden());
    r.outputs = Matrix(m.geom.rows, m.output_cols());
    for (int t = 0; t < m.geom.rows; ++t) {
        std::memcpy(r.states.row(t), cache.states[t].row(0), sizeof(double) * m.hidden());
        std::memcpy(r.outputs.row(t), cache.outputs[t].row(0), sizeof(double) * m.output_cols());
    }
    return r;
}

ModelGrads::ModelGrads(const RnnModel& m)
    : w_zy(m.w_zy.rows, m.w_zy.cols, 0.0),
      w_zz(m.w_zz.rows, m.w_zz.cols, 0.0),
      bias(m.bias.size(), 0.0),
      w_xz(m.w_xz.rows, m.w_xz.cols, 0.0) {}

void ModelGrads::add(const ModelGrads& o) {
    for (size_t i = 0; i < w_zy.data.size(); ++i) w_zy.data[i] += o.w_zy.data[i];
    for (size_t i = 0; i < w_zz.data.size(); ++i) w_zz.data[i] += o.w_zz.data[i];
    for (size_t i = 0; i < bias.size(); ++i) bias[i] += o.bias[i];
    for (size_t i = 0; i < w_xz.data.size(); ++i) w_xz.data[i] += o.w_xz.data[i];
}

void ModelGrads::scale(double s) {
    for (double& v : w_zy.data) v *= s;
    for (double& v : w_zz.data) v *= s;
    for (double& v : bias) v *= s;
    for (double& v : w_xz.data) v *= s;
}

double patch_loss(const RnnModel& m, const AnalysisPatch& patch, const Matrix& target, LossKind kind) {
    if (target.rows != m.geom.rows || target.cols != m.output_cols())
        throw ShapeError("patch_loss: target dims mismatch");
    const ForwardResult r = forward(m, patch);
    const double inv = 1.0 / (static_cast<double>(target.rows) * target.cols);
    double loss = 0.0;
    for (size_t i = 0; i < r.outputs.data.size(); ++i) {
        const double d = r.outputs.data[i] - target.data[i];
        loss += kind == LossKind::L2 ? d * d : std::abs(d);
    }
    return loss * inv;
}

ModelGrads backward(const RnnModel& m, const AnalysisPatch& patch, const Matrix& target, LossKind kind) {
    if (target.rows != m.geom.rows || target.cols != m.output_cols())
        throw ShapeError("backward: target dims mismatch");
    const std::vector<const AnalysisPatch*> one{&patch};
    BatchCache cache = forward_batch(m, one);
    const double inv = 1.0 / (static_cast<double>(target.rows) * target.cols);
    std::vector<Matrix> dx;
    dx.reserve(m.geom.rows);
    for (int t = 0; t < m.geom.rows; ++t) {
        Matrix d(1, m.output_cols());
        Matrix target_row(1, m.output_cols());
        std::memcpy(target_row.row(0), target.row(t), sizeof(double) * m.output_cols());
        output_grad(cache.outputs[t], target_row, kind, inv, d);
        dx.push_back(std::move(d));
    }
    ModelGrads grads(m);
    backward_batch(m, cache, dx, grads);
    return grads;
}

void adam_step(const std::vector<TensorRef>& tensors, AdamState& st) {
    if (st.m.empty()) {
        for (const auto& t : tensors) {
            st.m.emplace_back(t.n, 0.0);
            st.v.emplace_back(t.n, 0.0);
        }
    }
    if (st.m.size() != tensors.size()) throw ShapeError("adam_step: tensor count changed");
    st.step += 1;
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
    for (size_t k = 0; k < tensors.size(); ++k) {
        const TensorRef& t = tensors[k];
        if (st.m[k].size() != t.n) throw ShapeError("adam_step: tensor shape changed");
        double* m = st.m[k].data();
        double* v = st.v[k].data();
        for (size_t i = 0; i < t.n; ++i) {
            const double g = t.grad[i];
            m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g;
            v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g * g;
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            t.value[i] -= st.lr * mhat / (std::sqrt(vhat) + st.eps);
        }
    }
}

Discriminator init_discriminator(int input_dim, int hidden, Rng& rng) {
    if (input_dim < 1 || hidden < 1) throw ContractError("discriminator dims must be >= 1");
    Discriminator d;
    d.w1 = Matrix(input_dim, hidden);
    d.b1.assign(hidden, 0.0);
    d.w2 = Matrix(hidden, 1);
    d.b2.assign(1, 0.0);
    glorot_fill(d.w1, rng);
    glorot_fill(d.w2, rng);
    return d;
}

double disc_prob(const Discriminator& d, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != d.input_dim()) throw ShapeError("disc_prob: input length mismatch");
    return sigmoid(disc_forward(d, x).logit);
}

double disc_bce_step(Discriminator& d, const std::vector<std::vector<double>>& real,
                     const std::vector<std::vector<double>>& fake, AdamState& opt) {
    if (real.empty() && fake.empty()) throw ContractError("disc_bce_step: empty batch");
    DiscGrads grads(d);
    double loss = 0.0;
    for (const auto& x : real) {
        const DiscCache c = disc_forward(d, x);
        const double p = sigmoid(c.logit);
        loss += -safe_log(p);
        disc_backward(d, x, c, p - 1.0, &grads, nullptr);
    }
    for (const auto& x : fake) {
        const DiscCache c = disc_forward(d, x);
        const double p = sigmoid(c.logit);
        loss += -safe_log(1.0 - p);
        disc_backward(d, x, c, p, &grads, nullptr);
    }
    const double inv = 1.0 / static_cast<double>(real.size() + fake.size());
    for (double& v : grads.w1.data) v *= inv;
    for (double& v : grads.b1) v *= inv;
    for (double& v : grads.w2.data) v *= inv;
    for (double& v : grads.b2) v *= inv;
    adam_step(disc_refs(d, grads), opt);
    return loss * inv;
}

// ---- training ----

namespace {

struct TrainPlanes {
    Matrix input;  // [0,1]
    Matrix target; // [0,1] or residual
};

TrainPlanes prepare_planes(const PlanarImage& degraded, const PlanarImage& clean, bool residual) {
    if (degraded.height != clean.height || degraded.width != clean.width)
        throw ShapeError("train: degraded/clean dims differ (SR inputs must be pre-upsampled)");
    TrainPlanes tp;
    tp.input = luminance(degraded);
    Matrix target = luminance(clean);
    for (double& v : tp.input.data) v /= 255.0;
    for (double& v : target.data) v /= 255.0;
    if (residual) {
        for (size_t i = 0; i < target.data.size(); ++i) target.data[i] -= tp.input.data[i];
    }
    tp.target = std::move(target);
    return tp;
}

std::vector<Anchor> sample_anchors(const Matrix& plane, SamplePolicy policy, int m, Rng& rng,
                                   const std::vector<Anchor>* fixed) {
    if (policy == SamplePolicy::All || fixed != nullptr) {
        if (fixed) return *fixed;
        std::vector<Anchor> all;
        all.reserve(static_cast<size_t>(plane.rows) * plane.cols);
        for (int i = 0; i < plane.rows; ++i)
            for (int j = 0; j < plane.cols; ++j) all.push_back({i, j});
        return all;
    }
    std::vector<Anchor> anchors(static_cast<size_t>(m));
    for (auto& a : anchors) a = {rng.next_int(plane.rows), rng.next_int(plane.cols)};
    return anchors;
}

// Gradients for one batch; per-chunk partials reduced in chunk order so the
// result does not depend on the worker count.
struct BatchStats {
    double loss_sum = 0.0;
    double zeros = 0.0;
    double states = 0.0;
};

BatchStats batch_gradients(const RnnModel& model, const Matrix& input, const Matrix& target,
                           const std::vector<Anchor>& batch, LossKind kind, int threads, ModelGrads& grads,
                           const Discriminator* disc, double lambda_adv, double* adv_sum) {
    const size_t chunk = 8;
    const size_t nchunks = chunk_count(batch.size(), chunk);
    std::vector<ModelGrads> partial_grads;
    partial_grads.reserve(nchunks);
    for (size_t i = 0; i < nchunks; ++i) partial_grads.emplace_back(model);
    std::vector<BatchStats> partial_stats(nchunks);
    std::vector<double> partial_adv(nchunks, 0.0);

    parallel_chunks(batch.size(), chunk, threads, [&](size_t ci, size_t begin, size_t end) {
        std::vector<AnalysisPatch> patches;
        std::vector<const AnalysisPatch*> ptrs;
        std::vector<Matrix> targets;
        patches.reserve(end - begin);
        for (size_t i = begin; i < end; ++i) {
            patches.push_back(extract_patch(input, model.geom, batch[i].row, batch[i].col));
            targets.push_back(extract_footprint(target, model.geom, batch[i].row, batch[i].col));
        }
        for (auto& p : patches) ptrs.push_back(&p);

        BatchCache cache = forward_batch(model, ptrs);
        const int B = cache.batch;
        const int steps = model.geom.rows, p = model.output_cols();
        const double inv = 1.0 / (static_cast<double>(steps) * p);

        std::vector<Matrix> dx;
        dx.reserve(steps);
        double loss_sum = 0.0;
        for (int t = 0; t < steps; ++t) {
            Matrix target_rows(B, p);
            for (int b = 0; b < B; ++b) std::memcpy(target_rows.row(b), targets[b].row(t), sizeof(double) * p);
            Matrix d(B, p);
            // output_grad returns mean-per-element loss summed over the batch
            double chunk_loss = 0.0;
            for (int b = 0; b < B; ++b) {
                for (int j = 0; j < p; ++j) {
                    const double diff = cache.outputs[t].at(b, j) - target_rows.at(b, j);
                    if (kind == LossKind::L2) {
                        chunk_loss += diff * diff;
                        d.at(b, j) = 2.0 * diff * inv;
                    } else {
                        chunk_loss += std::abs(diff);
                        d.at(b, j) = (diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0)) * inv;
                    }
                }
            }
            loss_sum += chunk_loss * inv;
            dx.push_back(std::move(d));
        }

        // adversarial term: non-saturating generator loss on the flattened
        // predicted patch
        if (disc) {
            for (int b = 0; b < B; ++b) {
                std::vector<double> flat(static_cast<size_t>(steps) * p);
                for (int t = 0; t < steps; ++t)
                    for (int j = 0; j < p; ++j) flat[static_cast<size_t>(t) * p + j] = cache.outputs[t].at(b, j);
                const DiscCache dc = disc_forward(*disc, flat);
                const double prob = sigmoid(dc.logit);
                partial_adv[ci] += -safe_log(prob);
                // d(-log sigma(l))/dl = sigma(l) - 1
                std::vector<double> dflat;
                disc_backward(*disc, flat, dc, lambda_adv * (prob - 1.0), nullptr, &dflat);
                for (int t = 0; t < steps; ++t)
                    for (int j = 0; j < p; ++j) dx[t].at(b, j) += dflat[static_cast<size_t>(t) * p + j];
            }
        }

        backward_batch(model, cache, dx, partial_grads[ci]);

        double zeros = 0.0, states = 0.0;
        for (int t = 0; t < steps; ++t) {
            for (double v : cache.states[t].data) {
                zeros += v == 0.0 ? 1.0 : 0.0;
                states += 1.0;
            }
        }
        partial_stats[ci] = {loss_sum, zeros, states};
    });

    BatchStats total;
    for (size_t ci = 0; ci < nchunks; ++ci) {
        grads.add(partial_grads[ci]);
        total.loss_sum += partial_stats[ci].loss_sum;
        total.zeros += partial_stats[ci].zeros;
        total.states += partial_stats[ci].states;
        if (adv_sum) *adv_sum += partial_adv[ci];
    }
    return total;
}

} // namespace

TrainResult train_one_shot(const PlanarImage& degraded, const PlanarImage& clean, const TrainConfig& cfg, Rng& rng) {
    const TrainPlanes tp = prepare_planes(degraded, clean, cfg.residual);
    if (tp.input.rows < cfg.patch_rows || tp.input.cols < cfg.patch_cols)
        throw ContractError("train: image smaller than the analysis patch");
    const PatchGeometry geom = make_geometry(cfg.patch_rows, cfg.patch_cols, cfg.mode, cfg.stride, cfg.n_left);

    TrainResult result;
    result.model = init_model(geom, cfg.hidden, rng);

    AdamState opt;
    opt.lr = cfg.lr;
    opt.beta1 = cfg.beta1;
    opt.beta2 = cfg.beta2;
    opt.eps = cfg.adam_eps;

    std::vector<Anchor> fixed;
    const std::vector<Anchor>* fixed_ptr = nullptr;
    if (cfg.policy == SamplePolicy::FixedRandom) {
        fixed = sample_anchors(tp.input, SamplePolicy::RandomPerEpoch, cfg.sample_m, rng, nullptr);
        fixed_ptr = &fixed;
    }

    const double to_intensity = (cfg.loss == LossKind::L2) ? 255.0 * 255.0 : 255.0;

    for (int epoch = 0; epoch < cfg.epochs_stage1; ++epoch) {
        std::vector<Anchor> anchors = sample_anchors(tp.input, cfg.policy, cfg.sample_m, rng, fixed_ptr);
        if (anchors.empty()) throw ContractError("train: empty patch set");
        double epoch_loss = 0.0, zeros = 0.0, states = 0.0;
        size_t seen = 0;
        for (size_t off = 0; off < anchors.size(); off += cfg.batch) {
            const size_t end = std::min(anchors.size(), off + cfg.batch);
            std::vector<Anchor> batch(anchors.begin() + off, anchors.begin() + end);
            ModelGrads grads(result.model);
            const BatchStats stats =
                batch_gradients(result.model, tp.input, tp.target, batch, cfg.loss, cfg.threads, grads, nullptr,
                                0.0, nullptr);
            grads.scale(1.0 / static_cast<double>(batch.size()));
            adam_step(model_refs(result.model, grads), opt);
            epoch_loss += stats.loss_sum;
            zeros += stats.zeros;
            states += stats.states;
            seen += batch.size();
        }
        TrainLogEntry entry;
        entry.epoch = epoch;
        entry.stage = 1;
        entry.loss = epoch_loss / static_cast<double>(seen) * to_intensity;
        entry.zero_fraction = states > 0.0 ? zeros / states : 0.0;
        result.log.push_back(entry);
        if (cfg.stop_risk > 0.0 && entry.loss <= cfg.stop_risk) break;
    }

    if (cfg.epochs_stage2 > 0) {
        const int in_dim = geom.rows * geom.output_cols();
        result.disc = init_discriminator(in_dim, cfg.disc_hidden, rng);
        result.has_disc = true;

        AdamState disc_opt;
        disc_opt.lr = cfg.lr;
        disc_opt.beta1 = cfg.beta1;
        disc_opt.beta2 = cfg.beta2;
        disc_opt.eps = cfg.adam_eps;

        for (int epoch = 0; epoch < cfg.epochs_stage2; ++epoch) {
            std::vector<Anchor> anchors = sample_anchors(tp.input, cfg.policy, cfg.sample_m, rng, fixed_ptr);
            if (anchors.empty()) throw ContractError("train: empty patch set");
            double epoch_loss = 0.0, epoch_dloss = 0.0, epoch_adv = 0.0, zeros = 0.0, states = 0.0;
            size_t seen = 0;
            size_t dbatches = 0;
            for (size_t off = 0; off < anchors.size(); off += cfg.batch) {
                const size_t end = std::min(anchors.size(), off + cfg.batch);
                std::vector<Anchor> batch(anchors.begin() + off, anchors.begin() + end);

                // discriminator ascent: real target patches vs current fakes
                double dloss = 0.0;
                {
                    std::vector<AnalysisPatch> patches;
                    std::vector<const AnalysisPatch*> ptrs;
                    for (const Anchor& a : batch) patches.push_back(extract_patch(tp.input, geom, a.row, a.col));
                    for (auto& p : patches) ptrs.push_back(&p);
                    BatchCache cache = forward_batch(result.model, ptrs);
                    const int steps = geom.rows, p = geom.output_cols();
                    std::vector<std::vector<double>> real, fake;
                    for (size_t b = 0; b < batch.size(); ++b) {
                        const Matrix target = extract_footprint(tp.target, geom, batch[b].row, batch[b].col);
                        real.emplace_back(target.data.begin(), target.data.end());
                        std::vector<double> fake_flat(static_cast<size_t>(steps) * p);
                        for (int t = 0; t < steps; ++t)
                            for (int j = 0; j < p; ++j)
                                fake_flat[static_cast<size_t>(t) * p + j] = cache.outputs[t].at(static_cast<int>(b), j);
                        fake.push_back(std::move(fake_flat));
                    }
                    dloss = disc_bce_step(result.disc, real, fake, disc_opt);
                }

                // generator step on MSE + lambda * adversarial
                ModelGrads grads(result.model);
                double adv_sum = 0.0;
                const BatchStats stats =
                    batch_gradients(result.model, tp.input, tp.target, batch, LossKind::L2, cfg.threads, grads,
                                    &result.disc, cfg.lambda_adv, &adv_sum);
                grads.scale(1.0 / static_cast<double>(batch.size()));
                adam_step(model_refs(result.model, grads), opt);

                epoch_loss += stats.loss_sum;
                zeros += stats.zeros;
                states += stats.states;
                epoch_adv += adv_sum;
                epoch_dloss += dloss;
                seen += batch.size();
                dbatches += 1;
            }
            TrainLogEntry entry;
            entry.epoch = cfg.epochs_stage1 + epoch;
            entry.stage = 2;
            entry.loss = epoch_loss / static_cast<double>(seen) * 255.0 * 255.0;
            entry.zero_fraction = states > 0.0 ? zeros / states : 0.0;
            entry.disc_loss = epoch_dloss / static_cast<double>(dbatches);
            entry.adv_loss = epoch_adv / static_cast<double>(seen);
            result.log.push_back(entry);
        }
    }
    return result;
}

Matrix restore_luminance(const RnnModel& m, const Matrix& plane, bool residual, int threads) {
    if (plane.rows < m.geom.rows || plane.cols < m.geom.cols)
        throw ContractError("restore: image smaller than the analysis patch");
    Matrix scaled = plane;
    for (double& v : scaled.data) v /= 255.0;

    const std::vector<Anchor> anchors = iterate_anchors(plane.rows, plane.cols, m.geom);
    const size_t chunk = 512;
    const size_t nchunks = chunk_count(anchors.size(), chunk);
    std::vector<Accumulator> partials;
    partials.reserve(nchunks);
    for (size_t i = 0; i < nchunks; ++i) partials.emplace_back(plane.rows, plane.cols);

    parallel_chunks(anchors.size(), chunk, threads, [&](size_t ci, size_t begin, size_t end) {
        Accumulator& acc = partials[ci];
        const size_t sub = 32;
        for (size_t off = begin; off < end; off += sub) {
            const size_t stop = std::min(end, off + sub);
            std::vector<AnalysisPatch> patches;
            std::vector<const AnalysisPatch*> ptrs;
            for (size_t i = off; i < stop; ++i)
                patches.push_back(extract_patch(scaled, m.geom, anchors[i].row, anchors[i].col));
            for (auto& p : patches) ptrs.push_back(&p);
            BatchCache cache = forward_batch(m, ptrs);
            const int steps = m.geom.rows, p = m.output_cols();
            for (size_t b = 0; b < patches.size(); ++b) {
                if (m.geom.mode == PatchMode::Patch2Pixel) {
                    Matrix est(1, 1, cache.outputs[steps - 1].at(static_cast<int>(b), 0));
                    scatter_patch(acc, est, anchors[off + b], m.geom);
                } else {
                    Matrix est(steps, p);
                    for (int t = 0; t < steps; ++t)
                        for (int j = 0; j < p; ++j) est.at(t, j) = cache.outputs[t].at(static_cast<int>(b), j);
                    scatter_patch(acc, est, anchors[off + b], m.geom);
                }
            }
        }
    });

    Accumulator acc(plane.rows, plane.cols);
    for (const Accumulator& part : partials) acc.merge(part);
    Matrix pred = acc.finalize();
    Matrix out(plane.rows, plane.cols);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = residual ? plane.data[i] + 255.0 * pred.data[i] : 255.0 * pred.data[i];
    return out;
}

PlanarImage restore_image(const RnnModel& m, const PlanarImage& degraded, bool residual, int threads) {
    const Matrix y = luminance(degraded);
    const Matrix restored = restore_luminance(m, y, residual, threads);
    return with_luminance(degraded, restored);
}

// ---- checkpoint ----

void save_checkpoint(const RnnModel& m, const std::string& path, const std::string& extra_meta_json) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint " + path);
    out.write("OSR1", 4);
    put_u32(out, 1); // format version
    put_u32(out, 4); // tensor count

    write_tensor(out, "w_zy", m.w_zy);
    write_tensor(out, "w_zz", m.w_zz);
    Matrix bias(static_cast<int>(m.bias.size()), 1);
    bias.data = m.bias;
    write_tensor(out, "b", bias);
    write_tensor(out, "w_xz", m.w_xz);

    json meta = json::parse(extra_meta_json);
    meta["format"] = "row-major float32 tensors";
    meta["geometry"] = {
        {"rows", m.geom.rows},       {"cols", m.geom.cols},
        {"n_left", m.geom.n_left},   {"n_right", m.geom.n_right},
        {"stride", m.geom.stride},   {"mode", m.geom.mode == PatchMode::Patch2Pixel ? "p2x" : "p2p"},
    };
    meta["hidden"] = m.hidden();
    const std::string blob = meta.dump();
    put_u32(out, static_cast<uint32_t>(blob.size()));
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw IoError("short write on checkpoint " + path);
}

RnnModel load_checkpoint(const std::string& path, std::string* meta_json_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "OSR1", 4) != 0) throw FormatError("checkpoint: bad magic");
    const uint32_t version = get_u32(in);
    if (version != 1) throw FormatError("checkpoint: unsupported version " + std::to_string(version));
    const uint32_t count = get_u32(in);
    if (count != 4) throw FormatError("checkpoint: expected 4 tensors");

    RnnModel m;
    Matrix bias;
    for (uint32_t i = 0; i < count; ++i) {
        NamedTensor t = read_tensor(in);
        if (t.name == "w_zy") m.w_zy = std::move(t.value);
        else if (t.name == "w_zz") m.w_zz = std::move(t.value);
        else if (t.name == "b") bias = std::move(t.value);
        else if (t.name == "w_xz") m.w_xz = std::move(t.value);
        else throw FormatError("checkpoint: unknown tensor '" + t.name + "'");
    }
    const uint32_t json_len = get_u32(in);
    std::string blob(json_len, '\0');
    in.read(blob.data(), json_len);
    if (!in) throw FormatError("checkpoint: truncated metadata");

    json meta;
    try {
        meta = json::parse(blob);
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint: bad metadata json: ") + e.what());
    }
    const json& g = meta.at("geometry");
    const std::string mode = g.at("mode").get<std::string>();
    m.geom = make_geometry(g.at("rows").get<int>(), g.at("cols").get<int>(),
                           mode == "p2x" ? PatchMode::Patch2Pixel : PatchMode::Patch2Patch,
                           g.at("stride").get<int>(), g.at("n_left").get<int>());

    if (bias.cols != 1) throw FormatError("checkpoint: bias tensor must be a column");
    m.bias.assign(bias.data.begin(), bias.data.end());
    if (m.w_zy.rows != m.geom.cols || m.w_zz.rows != m.w_zz.cols || m.w_zz.rows != m.w_zy.cols ||
        static_cast<int>(m.bias.size()) != m.hidden() || m.w_xz.rows != m.hidden() ||
        m.w_xz.cols != m.geom.output_cols())
        throw FormatError("checkpoint: tensor shapes inconsistent with geometry");

    if (meta_json_out) *meta_json_out = blob;
    return m;
}

} // namespace osr
