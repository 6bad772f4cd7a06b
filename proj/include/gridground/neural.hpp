#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "gridground/program.hpp"
#include "gridground/world.hpp"

namespace gridground {

/// Nonnegative scalar field over the grid cells, flat-indexed like GridSpec.
struct AttentionMap {
  GridSpec grid;
  std::vector<double> values;

  AttentionMap() = default;
  explicit AttentionMap(const GridSpec& g, double fill = 0.0)
      : grid(g), values(static_cast<std::size_t>(g.cell_count()), fill) {}

  double& operator[](int cell) { return values[static_cast<std::size_t>(cell)]; }
  double operator[](int cell) const { return values[static_cast<std::size_t>(cell)]; }
  double& at(const Cell& c) { return (*this)[grid.flat(c)]; }
  double at(const Cell& c) const { return (*this)[grid.flat(c)]; }
  int size() const { return static_cast<int>(values.size()); }
};

struct KernelShape {
  int dx = 0;  // 2W+1
  int dy = 0;  // 2H+1
  int dz = 0;  // 2L+1
  int size() const { return dx * dy * dz; }
  static KernelShape for_grid(const GridSpec& g) { return {2 * g.width + 1, 2 * g.height + 1, 2 * g.layers + 1}; }
  /// Kernel index of displacement (ox, oy, oz); each component in [-W, W] etc.
  int index(int ox, int oy, int oz) const {
    return ((ox + dx / 2) * dy + (oy + dy / 2)) * dz + (oz + dz / 2);
  }
};

/// Learnable weights for every Detect word (filter of width C plus a scalar
/// bias) and every Shift preposition (one (2W+1, 2H+1, 2L+1) kernel), in one
/// flat buffer, plus the Adam state.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const Vocabulary& vocab, const GridSpec& grid);

  /// Detect entries uniform in [0, 0.1/sqrt(fan_in)); Shift kernels constant
  /// 1/sqrt(fan_in). Inputs to both relu modules are non-negative, so every
  /// unit starts active on every cell; a unit that starts negative everywhere
  /// gets no gradient and never learns.
  static ParamStore initialized(const Vocabulary& vocab, const GridSpec& grid, std::uint64_t seed);

  int channels() const { return channels_; }
  int prepositions() const { return prepositions_; }
  const GridSpec& grid() const { return grid_; }
  KernelShape kernel_shape() const { return kernel_; }
  std::uint64_t vocab_hash() const { return vocab_hash_; }

  std::size_t detect_offset(int feature) const { return static_cast<std::size_t>(feature) * (channels_ + 1); }
  std::size_t bias_offset(int feature) const { return detect_offset(feature) + channels_; }
  std::size_t shift_offset(int prep) const {
    return detect_offset(channels_) + static_cast<std::size_t>(prep) * kernel_.size();
  }

  std::span<double> detect_weights(int feature) { return {values_.data() + detect_offset(feature), static_cast<std::size_t>(channels_)}; }
  std::span<const double> detect_weights(int feature) const { return {values_.data() + detect_offset(feature), static_cast<std::size_t>(channels_)}; }
  double& detect_bias(int feature) { return values_[bias_offset(feature)]; }
  double detect_bias(int feature) const { return values_[bias_offset(feature)]; }
  std::span<double> shift_kernel(int prep) { return {values_.data() + shift_offset(prep), static_cast<std::size_t>(kernel_.size())}; }
  std::span<const double> shift_kernel(int prep) const { return {values_.data() + shift_offset(prep), static_cast<std::size_t>(kernel_.size())}; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& first_moment() { return m_; }
  std::vector<double>& second_moment() { return v_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }
  std::int64_t step_count() const { return step_; }
  void set_step_count(std::int64_t s) { step_ = s; }

 private:
  GridSpec grid_;
  KernelShape kernel_;
  int channels_ = 0;
  int prepositions_ = 0;
  std::uint64_t vocab_hash_ = 0;
  std::vector<double> values_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t step_ = 0;
};

/// Hand-set weights that ground exactly: each Detect is `scale` times the
/// indicator of its own feature, each Shift kernel is `scale` on every
/// whole multiple of its preposition's direction.
ParamStore indicator_params(const Vocabulary& vocab, const GridSpec& grid, double scale = 10.0);

/// Same layout as ParamStore::values().
using Gradients = std::vector<double>;

/// relu(w . x[cell] + b) per cell: a 1x1x1 convolution over the C features.
AttentionMap detect_forward(std::string_view word, const GridTensor& grid, const GridSpec& spec,
                            const Vocabulary& vocab, const ParamStore& params);
AttentionMap and_forward(const AttentionMap& a, const AttentionMap& b);
/// relu(kernel * a) with the input zero-padded by its own size on every axis.
/// out[p] = sum_q kernel[p - q] a[q], so a delta at +x translates toward +x.
AttentionMap shift_forward(std::string_view preposition, const AttentionMap& a, const Vocabulary& vocab,
                           const ParamStore& params);
/// Max-subtracted softmax over all cells.
std::vector<double> locate_forward(const AttentionMap& a);
int argmax(std::span<const double> values);

struct NodeRecord {
  AttentionMap pre;     // pre-activation for Detect/Shift; empty otherwise
  AttentionMap output;  // attention map (Locate: its input logits)
};

struct ExecutionTrace {
  std::vector<NodeRecord> nodes;  // parallel to the graph's nodes
  std::vector<double> distribution;
  int prediction = -1;  // flat cell index
};

/// Runs a Locate-rooted program. Throws DimMismatch / UnknownSymbol.
ExecutionTrace execute(const ProgramGraph& graph, const GridTensor& grid, const GridSpec& spec,
                       const Vocabulary& vocab, const ParamStore& params);

/// Recomputes every node from the inputs stored in the trace and compares bitwise.
bool replay_matches(const ProgramGraph& graph, const ExecutionTrace& trace, const GridTensor& grid,
                    const GridSpec& spec, const Vocabulary& vocab, const ParamStore& params);

double cross_entropy(const ExecutionTrace& trace, int gold_cell);

/// Exact gradient of -log p(gold_cell), added into `grads` (sized like the
/// store). Shared words accumulate.
void backprop(const ProgramGraph& graph, const ExecutionTrace& trace, const GridTensor& grid,
              const Vocabulary& vocab, const ParamStore& params, int gold_cell, Gradients& grads);
Gradients backprop(const ProgramGraph& graph, const ExecutionTrace& trace, const GridTensor& grid,
                   const Vocabulary& vocab, const ParamStore& params, int gold_cell);

struct AdamSettings {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam over the whole store; increments the step count.
void adam_step(ParamStore& params, std::span<const double> grads, const AdamSettings& settings = {});

/// Little-endian weight file: magic, version, vocab hash, grid spec, step
/// count, then detect blocks in feature order and shift kernels in
/// preposition order, then Adam's first and second moments in the same
/// layout, all float64.
void save_weights(const ParamStore& params, const std::filesystem::path& path);
ParamStore load_weights(const std::filesystem::path& path, const Vocabulary& vocab);

}  // namespace gridground
