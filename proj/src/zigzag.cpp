#include "zzhd/zigzag.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>
#include <unordered_map>

#include "zzhd/detail/gf2.hpp"
#include "zzhd/errors.hpp"
#include "zzhd/io.hpp"

namespace zzhd {

std::string format_half_index(HalfIndex h) {
  if (h.is_inf()) return "inf";
  const std::int64_t d = h.doubled();
  std::string out = std::to_string(d / 2);
  if (d % 2 != 0) out += ".5";
  return out;
}

std::optional<HalfIndex> parse_half_index(std::string_view text) {
  text = trim(text);
  if (text == "inf") return HalfIndex::infinity();
  std::int64_t whole = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), whole);
  if (res.ec != std::errc{} || whole < 0) return std::nullopt;
  const std::string_view rest(res.ptr, static_cast<std::size_t>(text.data() + text.size() - res.ptr));
  if (rest.empty() || rest == ".0") return HalfIndex::from_doubled(2 * whole);
  if (rest == ".5") return HalfIndex::from_doubled(2 * whole + 1);
  return std::nullopt;
}

std::size_t Barcode::multiplicity_at(HalfIndex position) const {
  return static_cast<std::size_t>(std::count_if(intervals.begin(), intervals.end(),
                                                [&](const Interval& i) { return i.covers(position); }));
}

namespace {

using detail::Column;

/// When a class was born: the operation index and the arrow direction.
struct Birth {
  std::size_t op = 0;
  bool forward = true;
};

/// Total order of births used to pick which class an event ends. A later birth
/// on a forward arrow is younger than everything before it; a later birth on a
/// backward arrow is older than everything before it.
bool older(const Birth& a, const Birth& b) {
  if (a.op < b.op) return b.forward;
  if (a.op > b.op) return !a.forward;
  return false;
}

/// One column of the cycle basis of a fixed dimension.
struct CycleColumn {
  Column cycle;
  Column chain;  // (dim+1)-chain bounding `cycle`; meaningful only when `boundary`
  bool boundary = false;
  bool live = true;
  Birth birth;
  std::int64_t birth_position = 0;
};

/// Maintains a cycle basis Z with pivot-distinct columns, a chain for every
/// boundary column, and the birth of every non-boundary column, under
/// simplex insertions and deletions.
class ZigzagEngine {
 public:
  explicit ZigzagEngine(int max_dim) : cycles_(static_cast<std::size_t>(max_dim) + 1),
                                       pivots_(static_cast<std::size_t>(max_dim) + 1),
                                       free_(static_cast<std::size_t>(max_dim) + 1) {}

  void insert(const Simplex& s, std::size_t op, std::int64_t checkpoint);
  void remove(const Simplex& s, std::size_t op, std::int64_t checkpoint);
  /// Closes every live class at infinity and returns all recorded bars.
  std::vector<Interval> finish();

 private:
  std::size_t add_column(int dim, CycleColumn col);
  void release(int dim, std::size_t j);
  void settle(int dim, std::size_t j);
  void record(int dim, std::int64_t birth, std::int64_t death);
  CycleColumn& at(int dim, std::size_t j) { return cycles_[static_cast<std::size_t>(dim)][j]; }

  std::map<Simplex, std::uint32_t> ids_;
  std::uint32_t next_id_ = 0;
  std::vector<std::vector<CycleColumn>> cycles_;
  std::vector<std::unordered_map<std::uint32_t, std::size_t>> pivots_;
  std::vector<std::vector<std::size_t>> free_;
  std::vector<Interval> bars_;
};

std::size_t ZigzagEngine::add_column(int dim, CycleColumn col) {
  auto& cols = cycles_[static_cast<std::size_t>(dim)];
  auto& freed = free_[static_cast<std::size_t>(dim)];
  std::size_t j;
  if (!freed.empty()) {
    j = freed.back();
    freed.pop_back();
    cols[j] = std::move(col);
  } else {
    j = cols.size();
    cols.push_back(std::move(col));
  }
  return j;
}

void ZigzagEngine::release(int dim, std::size_t j) {
  CycleColumn& c = at(dim, j);
  c.live = false;
  c.cycle.clear();
  c.chain.clear();
  free_[static_cast<std::size_t>(dim)].push_back(j);
}

void ZigzagEngine::record(int dim, std::int64_t birth, std::int64_t death) {
  if (birth >= death) return;  // never visible at a checkpoint
  bars_.push_back(Interval{dim, HalfIndex::from_doubled(birth), HalfIndex::from_doubled(death)});
}

// Restores distinct pivots after column j changed. Only additions that keep
// every class valid are used: boundaries into anything, and older cycles into
// younger ones.
void ZigzagEngine::settle(int dim, std::size_t j) {
  auto& pivots = pivots_[static_cast<std::size_t>(dim)];
  std::size_t a = j;
  while (true) {
    const std::uint32_t p = detail::pivot(at(dim, a).cycle);
    auto it = pivots.find(p);
    if (it == pivots.end()) {
      pivots.emplace(p, a);
      return;
    }
    if (it->second == a) return;
    const std::size_t b = it->second;
    CycleColumn& ca = at(dim, a);
    CycleColumn& cb = at(dim, b);
    // Decide which column absorbs the other; the absorber's pivot drops.
    std::size_t target;
    std::size_t source;
    if (ca.boundary && cb.boundary) {
      target = a;
      source = b;
    } else if (ca.boundary) {
      target = b;
      source = a;
    } else if (cb.boundary) {
      target = a;
      source = b;
    } else if (older(ca.birth, cb.birth)) {
      target = b;
      source = a;
    } else {
      target = a;
      source = b;
    }
    CycleColumn& t = at(dim, target);
    const CycleColumn& s = at(dim, source);
    detail::add_into(t.cycle, s.cycle);
    if (t.boundary) detail::add_into(t.chain, s.chain);
    if (t.cycle.empty()) throw InvariantError("zigzag: cycle basis column vanished");
    pivots[p] = source;
    a = target;
  }
}

void ZigzagEngine::insert(const Simplex& s, std::size_t op, std::int64_t checkpoint) {
  const int p = s.dim();
  if (static_cast<std::size_t>(p) >= cycles_.size()) throw InvariantError("zigzag: simplex above max_dim");
  const std::uint32_t id = next_id_++;
  if (!ids_.emplace(s, id).second) throw InvariantError("zigzag: simplex inserted twice");

  const Birth birth{op, true};
  if (p == 0) {
    const std::size_t j = add_column(0, CycleColumn{{id}, {}, false, true, birth, checkpoint});
    settle(0, j);
    return;
  }

  Column boundary;
  for (const Simplex& f : s.facets()) {
    auto it = ids_.find(f);
    if (it == ids_.end()) throw InvariantError("zigzag: face inserted after coface");
    boundary.push_back(it->second);
  }
  std::sort(boundary.begin(), boundary.end());

  // Express the boundary in the cycle basis of dimension p-1.
  auto& lower = pivots_[static_cast<std::size_t>(p - 1)];
  std::vector<std::size_t> used;
  Column work = boundary;
  while (!work.empty()) {
    auto it = lower.find(detail::pivot(work));
    if (it == lower.end()) throw InvariantError("zigzag: boundary not in the cycle span");
    detail::add_into(work, at(p - 1, it->second).cycle);
    used.push_back(it->second);
  }

  std::vector<std::size_t> live_classes;
  for (std::size_t j : used) {
    if (!at(p - 1, j).boundary) live_classes.push_back(j);
  }

  if (live_classes.empty()) {
    // The boundary was already a boundary: a new p-cycle appears.
    Column cycle{id};
    for (std::size_t j : used) detail::add_into(cycle, at(p - 1, j).chain);
    const std::size_t j = add_column(p, CycleColumn{std::move(cycle), {}, false, true, birth, checkpoint});
    settle(p, j);
    return;
  }

  // A (p-1)-class dies: the youngest one taking part in the boundary.
  std::size_t victim = live_classes.front();
  for (std::size_t j : live_classes) {
    if (older(at(p - 1, victim).birth, at(p - 1, j).birth)) victim = j;
  }
  CycleColumn& v = at(p - 1, victim);
  record(p - 1, v.birth_position, checkpoint);
  lower.erase(detail::pivot(v.cycle));
  v.cycle = std::move(boundary);
  v.chain = Column{id};
  v.boundary = true;
  settle(p - 1, victim);
}

void ZigzagEngine::remove(const Simplex& s, std::size_t op, std::int64_t checkpoint) {
  const int p = s.dim();
  auto found = ids_.find(s);
  if (found == ids_.end()) throw InvariantError("zigzag: removing an absent simplex");
  const std::uint32_t id = found->second;
  ids_.erase(found);

  auto& cols = cycles_[static_cast<std::size_t>(p)];
  std::vector<std::size_t> holders;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].live && detail::contains(cols[j].cycle, id)) {
      if (cols[j].boundary) throw InvariantError("zigzag: boundary contains a coface-free simplex");
      holders.push_back(j);
    }
  }

  if (!holders.empty()) {
    // A p-class dies. First purge the simplex from chains bounding (p-1)-cycles.
    if (p > 0) {
      const Column witness = cols[holders.front()].cycle;
      for (CycleColumn& c : cycles_[static_cast<std::size_t>(p - 1)]) {
        if (c.live && c.boundary && detail::contains(c.chain, id)) detail::add_into(c.chain, witness);
      }
    }
    std::sort(holders.begin(), holders.end(),
              [&](std::size_t a, std::size_t b) { return older(cols[a].birth, cols[b].birth); });
    const std::size_t victim = holders.front();
    record(p, cols[victim].birth_position, checkpoint);

    auto& pivots = pivots_[static_cast<std::size_t>(p)];
    Column carrier = cols[victim].cycle;
    std::uint32_t carrier_pivot = detail::pivot(carrier);
    pivots.erase(carrier_pivot);
    for (std::size_t k = 1; k < holders.size(); ++k) {
      CycleColumn& c = cols[holders[k]];
      const std::uint32_t own = detail::pivot(c.cycle);
      if (own > carrier_pivot) {
        detail::add_into(c.cycle, carrier);
      } else {
        Column previous = c.cycle;
        detail::add_into(c.cycle, carrier);
        pivots[carrier_pivot] = holders[k];
        pivots.erase(own);
        carrier = std::move(previous);
        carrier_pivot = own;
      }
    }
    release(p, victim);
    return;
  }

  // The simplex lies in no cycle, so some chain bounding a (p-1)-cycle uses it
  // and that boundary becomes a new class.
  if (p == 0) throw InvariantError("zigzag: vertex outside every 0-cycle");
  auto& lower = cycles_[static_cast<std::size_t>(p - 1)];
  std::vector<std::size_t> bounded;
  for (std::size_t j = 0; j < lower.size(); ++j) {
    if (lower[j].live && lower[j].boundary && detail::contains(lower[j].chain, id)) bounded.push_back(j);
  }
  if (bounded.empty()) throw InvariantError("zigzag: removed simplex is in no cycle and no chain");
  std::size_t freed = bounded.front();
  for (std::size_t j : bounded) {
    if (detail::pivot(lower[j].cycle) < detail::pivot(lower[freed].cycle)) freed = j;
  }
  for (std::size_t j : bounded) {
    if (j == freed) continue;
    detail::add_into(lower[j].cycle, lower[freed].cycle);
    detail::add_into(lower[j].chain, lower[freed].chain);
  }
  CycleColumn& c = lower[freed];
  c.boundary = false;
  c.chain.clear();
  c.birth = Birth{op, false};
  c.birth_position = checkpoint;
}

std::vector<Interval> ZigzagEngine::finish() {
  for (std::size_t d = 0; d < cycles_.size(); ++d) {
    for (CycleColumn& c : cycles_[d]) {
      if (c.live && !c.boundary) {
        bars_.push_back(Interval{static_cast<int>(d), HalfIndex::from_doubled(c.birth_position),
                                 HalfIndex::infinity()});
      }
    }
  }
  return std::move(bars_);
}

}  // namespace

std::vector<Barcode> zigzag_barcode(std::span<const SimplicialComplex> sequence, int p_max) {
  if (sequence.empty()) throw ConfigError("zigzag_barcode: empty sequence");
  if (p_max < 0) throw ConfigError("zigzag_barcode: p_max must be >= 0");
  const int max_dim = sequence.front().max_dim();
  for (const SimplicialComplex& k : sequence) {
    if (k.max_dim() != max_dim) throw ConfigError("zigzag_barcode: complexes disagree on max_dim");
  }
  if (max_dim < p_max + 1) throw ConfigError("zigzag_barcode: max_dim must be at least p_max + 1");

  ZigzagEngine engine(max_dim);
  std::size_t op = 0;
  for (const Simplex& s : sequence.front().simplices()) engine.insert(s, op++, 0);

  for (std::size_t i = 0; i + 1 < sequence.size(); ++i) {
    const auto& cur = sequence[i].simplices();
    const auto& next = sequence[i + 1].simplices();
    std::vector<Simplex> added;
    std::vector<Simplex> removed;
    std::set_difference(next.begin(), next.end(), cur.begin(), cur.end(), std::back_inserter(added));
    std::set_difference(cur.begin(), cur.end(), next.begin(), next.end(), std::back_inserter(removed));
    const auto at_union = static_cast<std::int64_t>(2 * i + 1);
    const auto at_next = static_cast<std::int64_t>(2 * i + 2);
    // With nothing removed the union is K_{i+1} itself.
    const std::int64_t add_checkpoint = removed.empty() ? at_next : at_union;
    for (const Simplex& s : added) engine.insert(s, op++, add_checkpoint);
    for (auto it = removed.rbegin(); it != removed.rend(); ++it) engine.remove(*it, op++, at_next);
  }

  std::vector<Barcode> out(static_cast<std::size_t>(p_max) + 1);
  for (int d = 0; d <= p_max; ++d) {
    out[static_cast<std::size_t>(d)].dim = d;
    out[static_cast<std::size_t>(d)].n_snapshots = sequence.size();
  }
  for (const Interval& bar : engine.finish()) {
    if (bar.dim <= p_max) out[static_cast<std::size_t>(bar.dim)].intervals.push_back(bar);
  }
  for (Barcode& b : out) std::sort(b.intervals.begin(), b.intervals.end());
  return out;
}

Timestamp snapshot_index_to_time(HalfIndex index, const WindowSpec& spec, Timestamp origin,
                                 std::size_t n_snapshots) {
  if (index.is_inf()) {
    const auto last = static_cast<std::int64_t>(n_snapshots == 0 ? 0 : n_snapshots - 1);
    return origin + last * spec.stride + spec.window_len;
  }
  if (index.doubled() < 0) throw ConfigError("snapshot index must be >= 0");
  return origin + index.doubled() * spec.stride / 2;
}

std::string format_barcode_csv(std::span<const Barcode> barcodes) {
  std::string out = "dim,birth,death\n";
  for (const Barcode& b : barcodes) {
    for (const Interval& i : b.intervals) {
      out += std::to_string(i.dim) + "," + format_half_index(i.birth) + "," + format_half_index(i.death) + "\n";
    }
  }
  return out;
}

std::vector<Interval> parse_barcode_csv(std::string_view text) {
  std::vector<Interval> out;
  std::istringstream in{std::string(text)};
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto fields = split_csv_line(line);
    int dim = -1;
    std::optional<HalfIndex> b, d;
    if (fields.size() == 3) {
      const std::string_view f0 = trim(fields[0]);
      std::from_chars(f0.data(), f0.data() + f0.size(), dim);
      b = parse_half_index(fields[1]);
      d = parse_half_index(fields[2]);
    }
    if (dim < 0 || !b || !d) throw DataError("bad barcode row at line " + std::to_string(line_no));
    out.push_back(Interval{dim, *b, *d});
  }
  return out;
}

}  // namespace zzhd
