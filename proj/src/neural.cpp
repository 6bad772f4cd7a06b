#include "gridground/neural.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

#include "gridground/errors.hpp"
#include "gridground/rng.hpp"

namespace gridground {

ParamStore::ParamStore(const Vocabulary& vocab, const GridSpec& grid)
    : grid_(grid),
      kernel_(KernelShape::for_grid(grid)),
      channels_(vocab.feature_width()),
      prepositions_(static_cast<int>(vocab.prepositions().size())),
      vocab_hash_(vocab.hash()) {
  const std::size_t total = detect_offset(channels_) + static_cast<std::size_t>(prepositions_) * kernel_.size();
  values_.assign(total, 0.0);
  m_.assign(total, 0.0);
  v_.assign(total, 0.0);
}

ParamStore ParamStore::initialized(const Vocabulary& vocab, const GridSpec& grid, std::uint64_t seed) {
  ParamStore p(vocab, grid);
  Rng rng(seed);
  // small: large random weights on attributes a noun never shows with are slow to unlearn
  const double detect_scale = 0.1 / std::sqrt(static_cast<double>(p.channels_));
  const std::size_t shift_start = p.detect_offset(p.channels_);
  for (std::size_t i = 0; i < shift_start; ++i) p.values_[i] = rng.uniform(0.0, detect_scale);
  const double shift_scale = 1.0 / std::sqrt(static_cast<double>(p.kernel_.size()));
  // flat start: random kernels either die under Adam or keep noise on offsets training never visits
  std::fill(p.values_.begin() + static_cast<std::ptrdiff_t>(shift_start), p.values_.end(), shift_scale);
  return p;
}

ParamStore indicator_params(const Vocabulary& vocab, const GridSpec& grid, double scale) {
  ParamStore p(vocab, grid);
  for (int f = 0; f < p.channels(); ++f) p.detect_weights(f)[static_cast<std::size_t>(f)] = scale;
  const KernelShape k = p.kernel_shape();
  for (int i = 0; i < p.prepositions(); ++i) {
    const Cell d = vocab.prepositions()[static_cast<std::size_t>(i)].direction;
    auto kernel = p.shift_kernel(i);
    for (int t = 1;; ++t) {
      const Cell o = d * t;
      if (std::abs(o.x) > grid.width || std::abs(o.y) > grid.height || std::abs(o.z) > grid.layers) break;
      kernel[static_cast<std::size_t>(k.index(o.x, o.y, o.z))] = scale;
      if (d == Cell{}) break;
    }
  }
  return p;
}

namespace {

int detect_feature(std::string_view word, const Vocabulary& vocab) {
  if (auto f = vocab.find_feature(word)) return *f;
  throw Error(ErrorCode::UnknownWord, "no detect parameters for '" + std::string(word) + "'");
}

int shift_index(std::string_view prep, const Vocabulary& vocab) {
  if (auto p = vocab.preposition_index(prep)) return *p;
  throw Error(ErrorCode::UnknownWord, "no shift parameters for '" + std::string(prep) + "'");
}

void check_grid(const GridSpec& a, const GridSpec& b) {
  if (a.width != b.width || a.height != b.height || a.layers != b.layers) {
    throw Error(ErrorCode::DimMismatch, "grid dimensions differ");
  }
}

void detect_into(int feature, const GridTensor& x, const ParamStore& params, AttentionMap& pre, AttentionMap& out) {
  const auto w = params.detect_weights(feature);
  const double b = params.detect_bias(feature);
  const int cells = x.cells();
  const int c_count = x.channels();
  for (int cell = 0; cell < cells; ++cell) {
    const double* col = x.column(cell);
    double s = b;
    for (int c = 0; c < c_count; ++c) s += w[static_cast<std::size_t>(c)] * col[c];
    pre[cell] = s;
    out[cell] = s > 0.0 ? s : 0.0;
  }
}

void shift_into(int prep, const AttentionMap& a, const ParamStore& params, AttentionMap& pre, AttentionMap& out) {
  const GridSpec& g = a.grid;
  const KernelShape ks = params.kernel_shape();
  const auto k = params.shift_kernel(prep);
  std::fill(pre.values.begin(), pre.values.end(), 0.0);
  for (int q = 0; q < a.size(); ++q) {
    const double aq = a[q];
    if (aq == 0.0) continue;
    const Cell cq = g.unflat(q);
    for (int px = 0; px < g.width; ++px) {
      for (int py = 0; py < g.height; ++py) {
        for (int pz = 0; pz < g.layers; ++pz) {
          const int ki = ks.index(px - cq.x, py - cq.y, pz - cq.z);
          pre[g.flat({px, py, pz})] += k[static_cast<std::size_t>(ki)] * aq;
        }
      }
    }
  }
  for (int p = 0; p < pre.size(); ++p) out[p] = pre[p] > 0.0 ? pre[p] : 0.0;
}

void product_into(const AttentionMap& a, const AttentionMap& b, AttentionMap& out) {
  for (int i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
}

}  // namespace

AttentionMap detect_forward(std::string_view word, const GridTensor& grid, const GridSpec& spec,
                            const Vocabulary& vocab, const ParamStore& params) {
  if (grid.channels() != params.channels()) throw Error(ErrorCode::DimMismatch, "feature width differs from parameters");
  if (grid.width() != spec.width || grid.height() != spec.height || grid.layers() != spec.layers) {
    throw Error(ErrorCode::DimMismatch, "tensor does not match grid spec");
  }
  const int f = detect_feature(word, vocab);
  AttentionMap pre(spec), out(spec);
  detect_into(f, grid, params, pre, out);
  return out;
}

AttentionMap and_forward(const AttentionMap& a, const AttentionMap& b) {
  if (a.values.size() != b.values.size()) throw Error(ErrorCode::DimMismatch, "and inputs differ in size");
  check_grid(a.grid, b.grid);
  AttentionMap out(a.grid);
  product_into(a, b, out);
  return out;
}

AttentionMap shift_forward(std::string_view preposition, const AttentionMap& a, const Vocabulary& vocab,
                           const ParamStore& params) {
  check_grid(a.grid, params.grid());
  if (a.size() != a.grid.cell_count()) throw Error(ErrorCode::DimMismatch, "attention size differs from grid");
  const int p = shift_index(preposition, vocab);
  AttentionMap pre(a.grid), out(a.grid);
  shift_into(p, a, params, pre, out);
  return out;
}

std::vector<double> locate_forward(const AttentionMap& a) {
  std::vector<double> p(a.values.size());
  if (p.empty()) return p;
  const double m = *std::max_element(a.values.begin(), a.values.end());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(a.values[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

int argmax(std::span<const double> values) {
  return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

ExecutionTrace execute(const ProgramGraph& graph, const GridTensor& grid, const GridSpec& spec,
                       const Vocabulary& vocab, const ParamStore& params) {
  if (!graph.is_locate()) throw Error(ErrorCode::MalformedPhrase, "execute needs a locate-rooted program");
  check_grid(spec, params.grid());
  if (grid.channels() != params.channels()) throw Error(ErrorCode::DimMismatch, "feature width differs from parameters");
  ExecutionTrace trace;
  trace.nodes.resize(static_cast<std::size_t>(graph.size()));
  for (int i = 0; i < graph.size(); ++i) {
    const Node& n = graph.node(i);
    NodeRecord& rec = trace.nodes[static_cast<std::size_t>(i)];
    rec.output = AttentionMap(spec);
    switch (n.kind) {
      case NodeKind::Detect:
        rec.pre = AttentionMap(spec);
        detect_into(detect_feature(n.symbol, vocab), grid, params, rec.pre, rec.output);
        break;
      case NodeKind::And:
        product_into(trace.nodes[static_cast<std::size_t>(n.inputs[0])].output,
                     trace.nodes[static_cast<std::size_t>(n.inputs[1])].output, rec.output);
        break;
      case NodeKind::Shift:
        rec.pre = AttentionMap(spec);
        shift_into(shift_index(n.symbol, vocab), trace.nodes[static_cast<std::size_t>(n.inputs[0])].output, params,
                   rec.pre, rec.output);
        break;
      case NodeKind::Locate:
        rec.output = trace.nodes[static_cast<std::size_t>(n.inputs[0])].output;
        break;
      case NodeKind::Position:
      case NodeKind::Held:
        throw Error(ErrorCode::MalformedPhrase, "position programs are not executable by the network");
    }
  }
  trace.distribution = locate_forward(trace.nodes.back().output);
  trace.prediction = argmax(trace.distribution);
  return trace;
}

bool replay_matches(const ProgramGraph& graph, const ExecutionTrace& trace, const GridTensor& grid,
                    const GridSpec& spec, const Vocabulary& vocab, const ParamStore& params) {
  if (trace.nodes.size() != static_cast<std::size_t>(graph.size())) return false;
  for (int i = 0; i < graph.size(); ++i) {
    const Node& n = graph.node(i);
    const NodeRecord& rec = trace.nodes[static_cast<std::size_t>(i)];
    auto input = [&](int k) -> const AttentionMap& { return trace.nodes[static_cast<std::size_t>(n.inputs[k])].output; };
    AttentionMap pre(spec), out(spec);
    switch (n.kind) {
      case NodeKind::Detect:
        detect_into(detect_feature(n.symbol, vocab), grid, params, pre, out);
        if (pre.values != rec.pre.values) return false;
        break;
      case NodeKind::And: product_into(input(0), input(1), out); break;
      case NodeKind::Shift:
        shift_into(shift_index(n.symbol, vocab), input(0), params, pre, out);
        if (pre.values != rec.pre.values) return false;
        break;
      case NodeKind::Locate: out = input(0); break;
      default: return false;
    }
    if (out.values != rec.output.values) return false;
  }
  return locate_forward(trace.nodes.back().output) == trace.distribution;
}

double cross_entropy(const ExecutionTrace& trace, int gold_cell) {
  const auto& logits = trace.nodes.back().output.values;
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - m);
  return m + std::log(z) - logits[static_cast<std::size_t>(gold_cell)];
}

void backprop(const ProgramGraph& graph, const ExecutionTrace& trace, const GridTensor& grid,
              const Vocabulary& vocab, const ParamStore& params, int gold_cell, Gradients& grads) {
  if (grads.size() != params.values().size()) grads.assign(params.values().size(), 0.0);
  const GridSpec& spec = trace.nodes.back().output.grid;
  const int cells = spec.cell_count();
  std::vector<std::vector<double>> g(static_cast<std::size_t>(graph.size()));
  for (auto& v : g) v.assign(static_cast<std::size_t>(cells), 0.0);

  // d(-log p_gold)/d logits = p - onehot(gold)
  auto& root = g.back();
  for (int c = 0; c < cells; ++c) root[static_cast<std::size_t>(c)] = trace.distribution[static_cast<std::size_t>(c)];
  root[static_cast<std::size_t>(gold_cell)] -= 1.0;

  const KernelShape ks = params.kernel_shape();
  for (int i = graph.size() - 1; i >= 0; --i) {
    const Node& n = graph.node(i);
    const auto& gi = g[static_cast<std::size_t>(i)];
    const NodeRecord& rec = trace.nodes[static_cast<std::size_t>(i)];
    switch (n.kind) {
      case NodeKind::Locate: {
        auto& gin = g[static_cast<std::size_t>(n.inputs[0])];
        for (int c = 0; c < cells; ++c) gin[static_cast<std::size_t>(c)] += gi[static_cast<std::size_t>(c)];
        break;
      }
      case NodeKind::And: {
        const auto& a = trace.nodes[static_cast<std::size_t>(n.inputs[0])].output;
        const auto& b = trace.nodes[static_cast<std::size_t>(n.inputs[1])].output;
        auto& ga = g[static_cast<std::size_t>(n.inputs[0])];
        auto& gb = g[static_cast<std::size_t>(n.inputs[1])];
        for (int c = 0; c < cells; ++c) {
          ga[static_cast<std::size_t>(c)] += gi[static_cast<std::size_t>(c)] * b[c];
          gb[static_cast<std::size_t>(c)] += gi[static_cast<std::size_t>(c)] * a[c];
        }
        break;
      }
      case NodeKind::Detect: {
        const int f = detect_feature(n.symbol, vocab);
        const std::size_t w0 = params.detect_offset(f);
        const int channels = grid.channels();
        double db = 0.0;
        for (int c = 0; c < cells; ++c) {
          if (!(rec.pre[c] > 0.0)) continue;
          const double d = gi[static_cast<std::size_t>(c)];
          if (d == 0.0) continue;
          db += d;
          const double* col = grid.column(c);
          for (int k = 0; k < channels; ++k) grads[w0 + static_cast<std::size_t>(k)] += d * col[k];
        }
        grads[params.bias_offset(f)] += db;
        break;
      }
      case NodeKind::Shift: {
        const int p = shift_index(n.symbol, vocab);
        const std::size_t k0 = params.shift_offset(p);
        const auto kernel = params.shift_kernel(p);
        const auto& a = trace.nodes[static_cast<std::size_t>(n.inputs[0])].output;
        auto& ga = g[static_cast<std::size_t>(n.inputs[0])];
        for (int pc = 0; pc < cells; ++pc) {
          if (!(rec.pre[pc] > 0.0)) continue;
          const double d = gi[static_cast<std::size_t>(pc)];
          if (d == 0.0) continue;
          const Cell cp = spec.unflat(pc);
          for (int q = 0; q < cells; ++q) {
            const Cell cq = spec.unflat(q);
            const auto ki = static_cast<std::size_t>(ks.index(cp.x - cq.x, cp.y - cq.y, cp.z - cq.z));
            grads[k0 + ki] += d * a[q];
            ga[static_cast<std::size_t>(q)] += d * kernel[ki];
          }
        }
        break;
      }
      case NodeKind::Position:
      case NodeKind::Held:
        throw Error(ErrorCode::MalformedPhrase, "position programs are not trainable");
    }
  }
}

Gradients backprop(const ProgramGraph& graph, const ExecutionTrace& trace, const GridTensor& grid,
                   const Vocabulary& vocab, const ParamStore& params, int gold_cell) {
  Gradients grads(params.values().size(), 0.0);
  backprop(graph, trace, grid, vocab, params, gold_cell, grads);
  return grads;
}

void adam_step(ParamStore& params, std::span<const double> grads, const AdamSettings& s) {
  auto& x = params.values();
  auto& m = params.first_moment();
  auto& v = params.second_moment();
  if (grads.size() != x.size()) throw Error(ErrorCode::DimMismatch, "gradient size differs from parameters");
  const std::int64_t t = params.step_count() + 1;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double gi = grads[i];
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * gi;
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * gi * gi;
    x[i] -= s.lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + s.epsilon);
  }
  params.set_step_count(t);
}

namespace {

constexpr char kMagic[8] = {'G', 'G', 'W', 'E', 'I', 'G', 'H', 'T'};
constexpr std::uint32_t kWeightVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}
void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}
void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error(ErrorCode::FormatError, "truncated weight file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorCode::FormatError, "truncated weight file");
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void save_weights(const ParamStore& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::FormatError, "cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kWeightVersion);
  put_u64(out, params.vocab_hash());
  const GridSpec& g = params.grid();
  put_u32(out, static_cast<std::uint32_t>(g.width));
  put_u32(out, static_cast<std::uint32_t>(g.height));
  put_u32(out, static_cast<std::uint32_t>(g.layers));
  put_f64(out, g.cell_size);
  put_f64(out, g.origin.x);
  put_f64(out, g.origin.y);
  put_f64(out, g.origin.z);
  put_u32(out, static_cast<std::uint32_t>(params.channels()));
  put_u32(out, static_cast<std::uint32_t>(params.prepositions()));
  put_u64(out, static_cast<std::uint64_t>(params.step_count()));
  for (double v : params.values()) put_f64(out, v);
  // optimizer state, so training can resume
  for (double v : params.first_moment()) put_f64(out, v);
  for (double v : params.second_moment()) put_f64(out, v);
  if (!out) throw Error(ErrorCode::FormatError, "write failed for " + path.string());
}

ParamStore load_weights(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FormatError, "cannot read " + path.string());
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kMagic)) {
    throw Error(ErrorCode::FormatError, path.string() + " is not a weight file");
  }
  if (get_u32(in) != kWeightVersion) throw Error(ErrorCode::FormatError, "unsupported weight file version");
  if (get_u64(in) != vocab.hash()) throw Error(ErrorCode::VocabMismatch, "weight file was trained on another vocabulary");
  GridSpec g;
  g.width = static_cast<int>(get_u32(in));
  g.height = static_cast<int>(get_u32(in));
  g.layers = static_cast<int>(get_u32(in));
  g.cell_size = get_f64(in);
  g.origin.x = get_f64(in);
  g.origin.y = get_f64(in);
  g.origin.z = get_f64(in);
  g.validate();
  const auto channels = get_u32(in);
  const auto preps = get_u32(in);
  ParamStore p(vocab, g);
  if (channels != static_cast<std::uint32_t>(p.channels()) || preps != static_cast<std::uint32_t>(p.prepositions())) {
    throw Error(ErrorCode::VocabMismatch, "weight file block counts differ from vocabulary");
  }
  p.set_step_count(static_cast<std::int64_t>(get_u64(in)));
  for (double& v : p.values()) v = get_f64(in);
  for (double& v : p.first_moment()) v = get_f64(in);
  for (double& v : p.second_moment()) v = get_f64(in);
  if (in.peek() != std::char_traits<char>::eof()) throw Error(ErrorCode::FormatError, "trailing bytes in weight file");
  return p;
}

}  // namespace gridground
