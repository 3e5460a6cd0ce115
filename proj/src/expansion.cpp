#include "symreg/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace symreg {

OperatorSet OperatorSet::defaults() {
  OperatorSet s;
  s.unary = {Op::Identity, Op::Exp, Op::Log, Op::Sqrt, Op::Inv, Op::Square};
  s.binary = {{Op::Add, true},
              {Op::Sub, false},
              {Op::Mul, true},
              {Op::Div, false}};
  return s;
}

OperatorSet OperatorSet::from_names(const std::vector<std::string>& names) {
  OperatorSet s;
  for (const auto& name : names) {
    auto op = op_from_name(name);
    if (!op) throw std::invalid_argument("unknown operator name: " + name);
    if (op_is_binary(*op)) {
      for (const auto& b : s.binary) {
        if (b.op == *op) throw std::invalid_argument("duplicate operator: " + name);
      }
      // subtraction/division self-pairs are degenerate constants
      bool self = op_is_symmetric(*op);
      s.binary.push_back({*op, self});
    } else {
      if (std::find(s.unary.begin(), s.unary.end(), *op) != s.unary.end()) {
        throw std::invalid_argument("duplicate operator: " + name);
      }
      s.unary.push_back(*op);
    }
  }
  return s;
}

bool OperatorSet::has_identity() const {
  return std::find(unary.begin(), unary.end(), Op::Identity) != unary.end();
}

PredictedCount predicted_count(std::uint64_t d, const OperatorSet& ops) {
  PredictedCount out;
  auto add = [&out](std::uint64_t v) {
    if (__builtin_add_overflow(out.count, v, &out.count)) {
      out.count = UINT64_MAX;
      out.saturated = true;
    }
  };
  auto mul = [&out](std::uint64_t a, std::uint64_t b) -> std::uint64_t {
    std::uint64_t r;
    if (__builtin_mul_overflow(a, b, &r)) {
      out.saturated = true;
      return UINT64_MAX;
    }
    return r;
  };
  add(mul(static_cast<std::uint64_t>(ops.unary.size()), d));
  for (const auto& b : ops.binary) {
    std::uint64_t pairs = mul(d, d - 1);
    if (op_is_symmetric(b.op)) pairs /= 2;
    add(pairs);
    if (b.self_pair) add(d);
  }
  return out;
}

FeaturePool FeaturePool::level0(const DataMatrix& data,
                                const std::vector<int>& screened,
                                const std::vector<UnitVector>& var_units) {
  FeaturePool pool;
  pool.level_ = 0;
  pool.rows_ = data.rows;
  pool.unit_checked_ = !var_units.empty();
  if (pool.unit_checked_ && var_units.size() != data.cols()) {
    throw std::invalid_argument("units must cover every primary feature");
  }

  Feature intercept;
  intercept.expr = Expression::constant(1.0);
  intercept.column = std::make_shared<Column>(data.rows, 1.0);
  intercept.is_intercept = true;
  if (pool.unit_checked_) {
    intercept.units = UnitVector::dimensionless(var_units.front().dims());
  }
  pool.features_.push_back(std::move(intercept));

  for (int idx : screened) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= data.cols()) {
      throw std::out_of_range("screened index beyond feature count");
    }
    const Column& col = data.columns[static_cast<std::size_t>(idx)];
    for (double v : col) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("non-finite value in primary feature");
      }
    }
    Feature f;
    f.expr = Expression::variable(idx);
    f.column = std::make_shared<Column>(col);
    f.symbol_uses = 1;
    f.symbols = {variable_symbol(idx)};
    f.complexity_bits = 0.0;  // K=1, B=1
    if (pool.unit_checked_) f.units = var_units[static_cast<std::size_t>(idx)];
    pool.features_.push_back(std::move(f));
  }
  return pool;
}

FeaturePool FeaturePool::from_features(int level, std::size_t rows,
                                       std::vector<Feature> features,
                                       bool unit_checked) {
  FeaturePool pool;
  pool.level_ = level;
  pool.rows_ = rows;
  pool.unit_checked_ = unit_checked;
  pool.features_ = std::move(features);
  return pool;
}

namespace {

struct StructKey {
  std::uint32_t op = 0;
  std::int32_t a = -1;
  std::int32_t b = -1;
  bool operator==(const StructKey&) const = default;
};

struct StructKeyHash {
  std::size_t operator()(const StructKey& k) const {
    std::uint64_t h = k.op;
    h = h * 0x9E3779B97F4A7C15ull + static_cast<std::uint32_t>(k.a);
    h = h * 0x9E3779B97F4A7C15ull + static_cast<std::uint32_t>(k.b);
    h ^= h >> 29;
    h *= 0xBF58476D1CE4E5B9ull;
    h ^= h >> 32;
    return static_cast<std::size_t>(h);
  }
};

void merge_symbols(const std::vector<SymbolId>& a,
                   const std::vector<SymbolId>& b, SymbolId extra,
                   std::vector<SymbolId>& out) {
  out.clear();
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  auto it = std::lower_bound(out.begin(), out.end(), extra);
  if (it == out.end() || *it != extra) out.insert(it, extra);
}

/// Streaming pool builder with canonical/numeric dedup and bounded size.
/// When the cap is reached, a candidate enters only by beating the current
/// worst entry under (complexity, canonical string); strings are
/// materialized lazily since ties are the uncommon case.
class PoolBuilder {
 public:
  PoolBuilder(const FeaturePool& prev, const ExpandOptions& opts)
      : prev_(prev), opts_(opts), rows_(prev.rows()) {
    scratch_.resize(rows_);
    if (opts_.max_pool_size == 0) {
      throw std::invalid_argument("max_pool_size must be positive");
    }
    for (std::size_t i = 0; i < prev.size(); ++i) {
      add_feature(prev[i], derive_key(prev[i]));
    }
    carried_ = alive_count_;
  }

  void consider_unary(Op op, int parent_id) {
    const Feature& p = slot(parent_id).f;
    const std::uint32_t uses = p.symbol_uses + 1;
    if (at_cap() && worse_than_top(complexity_bits(
                        uses, static_cast<std::uint32_t>(p.symbols.size())))) {
      return;
    }

    UnitVector units;
    if (prev_.unit_checked()) {
      auto u = unit_rule_unary(op, p.units);
      if (!u) return;
      units = std::move(*u);
    }

    StructKey key{static_cast<std::uint32_t>(op_symbol(op)), parent_id, -1};
    if (opts_.dedup && struct_map_.count(key) != 0) return;

    merge_symbols(p.symbols, {}, op_symbol(op), symbol_scratch_);
    double c_bits = complexity_bits(
        uses, static_cast<std::uint32_t>(symbol_scratch_.size()));
    if (at_cap() && !beats_top(c_bits, nullptr)) return;

    if (!apply_unary(op, p.column->data(), scratch_.data(), rows_)) return;
    if (opts_.dedup && numeric_duplicate()) return;

    Feature f;
    f.expr = Expression::unary(op, p.expr);
    f.column = std::make_shared<Column>(scratch_);
    f.complexity_bits = c_bits;
    f.symbol_uses = uses;
    f.symbols = symbol_scratch_;
    f.units = std::move(units);
    add_feature(std::move(f), key);
  }

  void consider_binary(Op op, int a_id, int b_id) {
    const Feature& fa = slot(a_id).f;
    const Feature& fb = slot(b_id).f;
    const std::uint32_t uses = fa.symbol_uses + fb.symbol_uses + 1;
    const auto b_lower = static_cast<std::uint32_t>(
        std::max(fa.symbols.size(), fb.symbols.size()));
    if (at_cap() && worse_than_top(complexity_bits(uses, b_lower))) return;

    UnitVector units;
    if (prev_.unit_checked()) {
      auto u = unit_rule_binary(op, fa.units, fb.units);
      if (!u) return;
      units = std::move(*u);
    }

    StructKey key{static_cast<std::uint32_t>(op_symbol(op)), a_id, b_id};
    if (op_is_symmetric(op) && key.a > key.b) std::swap(key.a, key.b);
    if (opts_.dedup && struct_map_.count(key) != 0) return;

    merge_symbols(fa.symbols, fb.symbols, op_symbol(op), symbol_scratch_);
    double c_bits = complexity_bits(
        uses, static_cast<std::uint32_t>(symbol_scratch_.size()));
    if (at_cap() && !beats_top(c_bits, nullptr)) return;

    if (!apply_binary(op, fa.column->data(), fb.column->data(), scratch_.data(),
                      rows_)) {
      return;
    }
    if (opts_.dedup && numeric_duplicate()) return;

    Feature f;
    f.expr = Expression::binary(op, fa.expr, fb.expr);
    f.column = std::make_shared<Column>(scratch_);
    f.complexity_bits = c_bits;
    f.symbol_uses = uses;
    f.symbols = symbol_scratch_;
    f.units = std::move(units);
    add_feature(std::move(f), key);
  }

  std::size_t carried() const { return carried_; }
  std::size_t alive() const { return alive_count_; }

  FeaturePool finish(int level) {
    std::vector<std::pair<std::uint64_t, int>> order;
    order.reserve(alive_count_);
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (slots_[i].alive) order.emplace_back(slots_[i].seq, static_cast<int>(i));
    }
    std::sort(order.begin(), order.end());
    std::vector<Feature> feats;
    feats.reserve(order.size());
    for (auto& [seq, idx] : order) feats.push_back(std::move(slots_[idx].f));
    return FeaturePool::from_features(level, rows_, std::move(feats),
                                      prev_.unit_checked());
  }

 private:
  struct Slot {
    Feature f;
    std::string canon;
    bool canon_ready = false;
    bool alive = false;
    bool has_key = false;
    StructKey key;
    double mean = 0.0;
    std::uint64_t seq = 0;
  };

  Slot& slot(int id) { return slots_[static_cast<std::size_t>(id)]; }

  bool at_cap() const { return alive_count_ >= opts_.max_pool_size; }

  const std::string& canon_of(int id) {
    Slot& s = slot(id);
    if (!s.canon_ready) {
      s.canon = canonical_string(*s.f.expr);
      s.canon_ready = true;
    }
    return s.canon;
  }

  // heap orders alive slots with the worst (highest complexity, then
  // lexicographically greatest canonical string) on top
  bool heap_less(int i, int j) {
    const Feature& a = slot(i).f;
    const Feature& b = slot(j).f;
    if (a.complexity_bits != b.complexity_bits) {
      return a.complexity_bits < b.complexity_bits;
    }
    return canon_of(i) < canon_of(j);
  }

  void ensure_heap() {
    if (heap_ready_) return;
    heap_.clear();
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (slots_[i].alive) heap_.push_back(static_cast<int>(i));
    }
    auto cmp = [this](int i, int j) { return heap_less(i, j); };
    std::make_heap(heap_.begin(), heap_.end(), cmp);
    heap_ready_ = true;
  }

  bool worse_than_top(double c_lower_bound) {
    ensure_heap();
    return c_lower_bound > slot(heap_.front()).f.complexity_bits;
  }

  // strict comparison against the worst pool entry; candidate string is
  // computed only on an exact complexity tie
  bool beats_top(double c_bits, const Expression* expr) {
    ensure_heap();
    const Slot& top = slot(heap_.front());
    if (c_bits < top.f.complexity_bits) return true;
    if (c_bits > top.f.complexity_bits) return false;
    if (expr == nullptr) return true;  // optimistic pre-check before eval
    return canonical_string(*expr) < canon_of(heap_.front());
  }

  bool numeric_duplicate() {
    double mean = 0.0, norm = 0.0;
    for (double v : scratch_) {
      mean += v;
      norm = std::max(norm, std::abs(v));
    }
    mean /= static_cast<double>(rows_);
    double delta = 2.0 * opts_.numeric_rtol * (norm + std::abs(mean)) + 1e-300;
    auto lo = mean_index_.lower_bound(mean - delta);
    auto hi = mean_index_.upper_bound(mean + delta);
    for (auto it = lo; it != hi; ++it) {
      const Column& other = *slot(it->second).f.column;
      bool equal = true;
      for (std::size_t r = 0; r < rows_; ++r) {
        double x = other[r], y = scratch_[r];
        if (std::abs(x - y) >
            opts_.numeric_rtol * std::max(std::abs(x), std::abs(y))) {
          equal = false;
          break;
        }
      }
      if (equal) return true;
    }
    return false;
  }

  void add_feature(Feature f, std::optional<StructKey> key) {
    if (at_cap()) {
      // final arbitration with the candidate's real canonical string
      if (!beats_top(f.complexity_bits, f.expr.get())) return;
      evict_top();
    }
    int id;
    if (!free_slots_.empty()) {
      id = free_slots_.back();
      free_slots_.pop_back();
      slots_[static_cast<std::size_t>(id)] = Slot{};
    } else {
      id = static_cast<int>(slots_.size());
      slots_.emplace_back();
    }
    Slot& s = slot(id);
    s.seq = next_seq_++;
    s.alive = true;
    double mean = 0.0;
    for (double v : *f.column) mean += v;
    s.mean = mean / static_cast<double>(rows_);
    if (key) {
      s.has_key = true;
      s.key = *key;
      struct_map_.emplace(*key, id);
    }
    expr_ids_.emplace(f.expr.get(), id);
    mean_index_.emplace(s.mean, id);
    s.f = std::move(f);
    ++alive_count_;
    if (heap_ready_) {
      heap_.push_back(id);
      auto cmp = [this](int i, int j) { return heap_less(i, j); };
      std::push_heap(heap_.begin(), heap_.end(), cmp);
    }
  }

  void evict_top() {
    auto cmp = [this](int i, int j) { return heap_less(i, j); };
    std::pop_heap(heap_.begin(), heap_.end(), cmp);
    int id = heap_.back();
    heap_.pop_back();
    Slot& s = slot(id);
    if (s.has_key) struct_map_.erase(s.key);
    expr_ids_.erase(s.f.expr.get());
    auto range = mean_index_.equal_range(s.mean);
    for (auto it = range.first; it != range.second; ++it) {
      if (it->second == id) {
        mean_index_.erase(it);
        break;
      }
    }
    s.alive = false;
    s.f = Feature{};
    --alive_count_;
    free_slots_.push_back(id);
  }

  // reconstructs the structural key of a carried feature when its children
  // are still pool members; otherwise the numeric layer handles collisions
  std::optional<StructKey> derive_key(const Feature& f) {
    const Expression& e = *f.expr;
    if (e.kind() == Expression::Kind::Unary) {
      auto it = expr_ids_.find(e.left().get());
      if (it == expr_ids_.end()) return std::nullopt;
      return StructKey{static_cast<std::uint32_t>(op_symbol(e.op())),
                       it->second, -1};
    }
    if (e.kind() == Expression::Kind::Binary) {
      auto a = expr_ids_.find(e.left().get());
      auto b = expr_ids_.find(e.right().get());
      if (a == expr_ids_.end() || b == expr_ids_.end()) return std::nullopt;
      StructKey k{static_cast<std::uint32_t>(op_symbol(e.op())), a->second,
                  b->second};
      if (op_is_symmetric(e.op()) && k.a > k.b) std::swap(k.a, k.b);
      return k;
    }
    return std::nullopt;
  }

  const FeaturePool& prev_;
  ExpandOptions opts_;
  std::size_t rows_;
  std::size_t carried_ = 0;
  std::vector<Slot> slots_;
  std::vector<int> free_slots_;
  std::size_t alive_count_ = 0;
  std::uint64_t next_seq_ = 0;
  Column scratch_;
  std::vector<SymbolId> symbol_scratch_;
  std::unordered_map<StructKey, int, StructKeyHash> struct_map_;
  std::unordered_map<const Expression*, int> expr_ids_;
  std::multimap<double, int> mean_index_;
  std::vector<int> heap_;
  bool heap_ready_ = false;
};

}  // namespace

FeaturePool expand_level(const FeaturePool& pool, const OperatorSet& ops,
                         const ExpandOptions& opts) {
  if (pool.size() == 0) throw std::invalid_argument("empty feature pool");

  PoolBuilder builder(pool, opts);
  const int d = static_cast<int>(pool.size());

  auto is_operand = [&pool](int i) {
    return !pool[static_cast<std::size_t>(i)].is_intercept;
  };

  for (Op op : ops.unary) {
    if (op == Op::Identity) continue;  // realized as carry-forward
    for (int i = 0; i < d; ++i) {
      if (is_operand(i)) builder.consider_unary(op, i);
    }
  }
  for (const auto& spec : ops.binary) {
    if (op_is_symmetric(spec.op)) {
      for (int i = 0; i < d; ++i) {
        if (!is_operand(i)) continue;
        for (int j = spec.self_pair ? i : i + 1; j < d; ++j) {
          if (is_operand(j)) builder.consider_binary(spec.op, i, j);
        }
      }
    } else {
      for (int i = 0; i < d; ++i) {
        if (!is_operand(i)) continue;
        for (int j = 0; j < d; ++j) {
          if (!is_operand(j)) continue;
          if (j == i && !spec.self_pair) continue;
          builder.consider_binary(spec.op, i, j);
        }
      }
    }
  }

  if (builder.alive() <= builder.carried() &&
      builder.alive() < opts.max_pool_size) {
    throw std::runtime_error("expansion produced no valid features");
  }
  return builder.finish(pool.level() + 1);
}

FeaturePool complexity_filter(const FeaturePool& pool, double lambda_bits) {
  if (lambda_bits < 0.0) throw std::invalid_argument("lambda must be >= 0");
  std::vector<Feature> kept;
  for (const auto& f : pool.features()) {
    if (f.is_intercept || f.complexity_bits <= lambda_bits) kept.push_back(f);
  }
  return FeaturePool::from_features(pool.level(), pool.rows(), std::move(kept),
                                    pool.unit_checked());
}

}  // namespace symreg
