#include "porous/construction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "porous/errors.hpp"
#include "porous/rng.hpp"

namespace porous {

// ---- configuration arithmetic ----------------------------------------------

double BuildConfig::enlargement_for(int k) const {
  if (strict) {
    const double e = epsilon(k);
    return 1.0 / (e * e * e);
  }
  return enlargement;
}

double BuildConfig::stop_fraction(int k) const {
  if (strict) return std::ldexp(1.0, -(k + 3));
  return stop_fractions.at(static_cast<std::size_t>(k - 1));
}

double BuildConfig::stop_threshold(int k) const { return stop_fraction(k) * cross_section_area(s, n); }

void BuildConfig::validate() const {
  auto fail = [](const std::string& m) { throw InvalidArgument("config: " + m); };
  if (n < 3 || n + 1 > kMaxDim) fail("n must be in [3, " + std::to_string(kMaxDim - 1) + "]");
  if (!(s > 0.0 && s < 0.5)) fail("s must be in (0, 1/2) so that B(c,s) lies in the unit cube");
  if (!(r > 0.0 && r < 1.0 / 32.0)) fail("r must be in (0, 1/32)");
  if (!(L >= 1.0)) fail("L must be >= 1");
  if (epsilons.empty()) fail("epsilons must list at least one stage");
  for (double e : epsilons)
    if (!(e > 0.0)) fail("epsilons must be positive");
  if (strict) {
    if (validate_epsilons(epsilons) != EpsilonVerdict::strict)
      fail("strict mode needs eps_i < 2^-i and 3*sum(eps) <= 1/64");
  } else {
    if (!(enlargement > 1.0)) fail("enlargement must be > 1");
    if (stop_fractions.size() != epsilons.size()) fail("stop_fractions must have one entry per stage");
    for (double f : stop_fractions)
      if (!(f > 0.0 && f < 1.0)) fail("stop_fractions must lie in (0, 1)");
  }
  if (budgets.radius_samples < 1024 || budgets.coverage_samples < 1024) fail("sample budgets must be >= 1024");
  if (!(budgets.packing_density > 0.0)) fail("packing_density must be positive");
  if (budgets.max_levels < 1) fail("max_levels must be >= 1");
  if (budgets.max_balls < 1) fail("max_balls must be >= 1");
}

EpsilonVerdict validate_epsilons(std::span<const double> eps) {
  if (eps.empty()) throw InvalidArgument("validate_epsilons: empty list");
  bool strict = true;
  double sum = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw InvalidArgument("validate_epsilons: entries must be positive");
    if (!(eps[i] < std::ldexp(1.0, -static_cast<int>(i + 1)))) strict = false;
    sum += eps[i];
  }
  if (!(3.0 * sum <= 1.0 / 64.0)) strict = false;
  return strict ? EpsilonVerdict::strict : EpsilonVerdict::relaxed;
}

double strict_stop_threshold(int n, double s, int k) { return cross_section_area(s, n) * std::ldexp(1.0, -(k + 3)); }

double strict_cover_bound(int n, double s, int k) { return cross_section_area(s, n) * std::ldexp(1.0, -(k + 2)); }

double strict_level_coverage(int n, double eps) { return std::pow(eps, 3 * n) / std::ldexp(1.0, n + 1); }

double level_coverage_guarantee(int n, double E) { return std::pow(1.0 / (2.0 * E), n) / 2.0; }

double level_count_bound(int n, double E, double stop_fraction) {
  return std::log(1.0 / stop_fraction) / level_coverage_guarantee(n, E);
}

FeasibilityEstimate estimate_feasibility(const BuildConfig& cfg) {
  FeasibilityEstimate f;
  // Balls of radius <= s/E must cover measure (1 - stop) omega s^n, so there are at least
  // (1 - stop) E^n of them.
  const double E = cfg.enlargement_for(1);
  f.log10_min_balls = std::log10(1.0 - cfg.stop_fraction(1)) + cfg.n * std::log10(E);
  const double cap = std::log10(static_cast<double>(cfg.budgets.max_balls));
  f.feasible = f.log10_min_balls <= cap;
  std::ostringstream msg;
  msg << "first stage needs at least 10^" << f.log10_min_balls << " balls (ball budget 10^" << cap << ")";
  if (!f.feasible) {
    msg << "; strict parameters are infeasible at this budget, use relaxed mode (strict=false with an"
           " explicit enlargement and stop_fractions)";
  }
  f.message = msg.str();
  return f;
}

// ---- stage state ------------------------------------------------------------

StageState::StageState(Ball base, double E) : base_(std::move(base)), E_(E) {
  if (!(E_ > 1.0)) throw InvalidArgument("StageState: enlargement must be > 1");
}

void StageState::add(std::span<const Ball> balls) {
  for (const Ball& b : balls) {
    balls_.push_back(b);
    covered_volume_ += cross_section_area(b.radius, base_.dim());
  }
}

void StageState::prepare(double cap) {
  cap_ = cap;
  index_ = BallIndex(balls_, {E_, cap});
}

bool StageState::covered(std::span<const double> x) const {
  bool hit = false;
  index_.for_each_containing(x, [&](std::uint32_t id) { hit = hit || distance(x, balls_[id].center) < balls_[id].radius; });
  return hit;
}

double StageState::admissible_radius(std::span<const double> x) const {
  const double rho = distance(x, base_.center);
  if (rho >= base_.radius) return -1.0;
  double best = std::min(cap_, base_.radius - rho) / E_;
  bool inside = false;
  index_.for_each_containing(x, [&](std::uint32_t id) {
    const Ball& b = balls_[id];
    const double d = distance(x, b.center);
    if (d < b.radius) inside = true;
    best = std::min({best, std::abs(d - E_ * b.radius) / E_, d - b.radius});
  });
  return inside ? -1.0 : best;
}

double StageState::boundary_distance(std::span<const double> x) const {
  double best = std::min(cap_, std::abs(base_.radius - distance(x, base_.center)));
  index_.for_each_containing(x, [&](std::uint32_t id) {
    const Ball& b = balls_[id];
    best = std::min(best, std::abs(distance(x, b.center) - E_ * b.radius));
  });
  return best;
}

double StageState::uncovered_measure() const {
  return std::max(0.0, cross_section_area(base_.radius, base_.dim()) - covered_volume_);
}

// ---- level radius -------------------------------------------------------------

namespace {

constexpr double kHalfMargin = 0.01;

bool certifies_half(const Proportion& p) { return p.lower >= 0.5 && p.p >= 0.5 + kHalfMargin; }

/// Admissible radii of the uncovered sample points (covered or rejected attempts dropped).
std::vector<double> uncovered_radii(const StageState& state, std::uint64_t samples, std::uint64_t key,
                                    kernels::Exec exec) {
  const BallSampler sampler(state.base(), key, samples);
  std::vector<double> a(samples, -1.0);
  kernels::for_blocks(samples, exec, [&](std::uint64_t lo, std::uint64_t hi) {
    std::array<double, kMaxDim> buf{};
    std::span<double> x(buf.data(), static_cast<std::size_t>(state.base().dim()));
    for (std::uint64_t i = lo; i < hi; ++i)
      if (sampler.attempt(i, x)) a[i] = state.admissible_radius(x);
  });
  std::erase_if(a, [](double v) { return v < 0.0; });
  return a;
}

}  // namespace

RadiusChoice choose_level_radius(const StageState& state, double r_prev, const BuildBudgets& budget,
                                 std::uint64_t key, kernels::Exec exec) {
  if (!(state.uncovered_measure() > 0.0)) throw InvalidArgument("choose_level_radius: uncovered set is empty");
  const double E = state.enlargement();
  std::uint64_t samples = budget.radius_samples;
  int widenings = 0;
  std::vector<double> radii = uncovered_radii(state, samples, stream_key(key, {0}), exec);

  RadiusChoice out;
  double r = r_prev / E;
  while (true) {
    if (radii.size() < 64) {
      throw NeedsMoreSamples("choose_level_radius: only " + std::to_string(radii.size()) +
                             " uncovered sample points; raise radius_samples");
    }
    const auto far = static_cast<std::uint64_t>(std::count_if(radii.begin(), radii.end(), [r](double a) { return a >= r; }));
    const Proportion p = wilson(far, radii.size());
    if (certifies_half(p)) {
      out.radius = r;
      out.far_fraction = p;
      return out;
    }
    if (p.upper >= 0.5 && widenings < 2) {
      // Ambiguous at this radius: widen the sample before giving up on it.
      samples *= 4;
      ++widenings;
      radii = uncovered_radii(state, samples, stream_key(key, {static_cast<std::uint64_t>(widenings)}), exec);
      continue;
    }
    if (++out.halvings > budget.max_radius_halvings) {
      throw NeedsMoreSamples("choose_level_radius: no certified radius after " +
                             std::to_string(budget.max_radius_halvings) + " halvings");
    }
    r *= 0.5;
  }
}

// ---- greedy packing -----------------------------------------------------------------

namespace {

class CentreGrid {
 public:
  CentreGrid(int dim, double cell) : dim_(dim), cell_(cell) {}

  /// True when some stored centre lies at distance < `sep` (sep <= cell) from x.
  bool any_within(std::span<const double> x, double sep, std::span<const Ball> centres) const {
    std::int64_t base[kMaxDim], cur[kMaxDim];
    for (int j = 0; j < dim_; ++j) {
      base[j] = static_cast<std::int64_t>(std::floor(x[j] / cell_));
      cur[j] = base[j] - 1;
    }
    while (true) {
      auto it = cells_.find(key(cur));
      if (it != cells_.end())
        for (std::uint32_t id : it->second)
          if (distance(x, centres[id].center) < sep) return true;
      int j = 0;
      while (j < dim_ && cur[j] == base[j] + 1) {
        cur[j] = base[j] - 1;
        ++j;
      }
      if (j == dim_) return false;
      ++cur[j];
    }
  }

  void insert(std::span<const double> x, std::uint32_t id) {
    std::int64_t c[kMaxDim];
    for (int j = 0; j < dim_; ++j) c[j] = static_cast<std::int64_t>(std::floor(x[j] / cell_));
    cells_[key(c)].push_back(id);
  }

 private:
  std::uint64_t key(const std::int64_t* c) const {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (int j = 0; j < dim_; ++j) h = splitmix64(h ^ static_cast<std::uint64_t>(c[j]));
    return h;
  }

  int dim_;
  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

}  // namespace

LevelFamily pack_level(const StageState& state, double r, const BuildBudgets& budget, std::uint64_t key,
                       LevelDiagnostics* diag, kernels::Exec exec) {
  if (!(r > 0.0)) throw InvalidArgument("pack_level: radius must be positive");
  const int n = state.base().dim();
  const double E = state.enlargement();
  const double R = r * E;
  const double s = state.base().radius;
  const double uncovered = state.uncovered_measure();

  LevelFamily level;
  level.radius = r;
  LevelDiagnostics d;
  d.radius = r;
  d.uncovered_before = uncovered;

  // Doubled enlargements covering half the uncovered set need at least this many balls.
  const double projected = 0.5 * uncovered / cross_section_area(2.0 * R, n);
  if (projected > static_cast<double>(budget.max_balls)) {
    std::ostringstream diagtxt;
    diagtxt << "level radius " << r << " needs at least " << projected << " balls; max_balls is "
            << budget.max_balls;
    throw ConstructionFailure("pack_level: ball budget exceeded", diagtxt.str());
  }

  const double chunk_d = std::ceil(budget.packing_density * std::pow(s / R, n));
  if (chunk_d > 64.0 * static_cast<double>(budget.max_balls)) {
    std::ostringstream diagtxt;
    diagtxt << "level radius " << r << " needs " << chunk_d << " candidate centres per round; limit is 64 * max_balls";
    throw ConstructionFailure("pack_level: candidate budget exceeded", diagtxt.str());
  }
  const auto chunk = static_cast<std::uint64_t>(chunk_d);
  const BallSampler pool(state.base(), stream_key(key, {fnv1a("pool")}), 1);
  CentreGrid grid(n, 2.0 * R);
  std::vector<double> admissible;
  std::vector<double> point(static_cast<std::size_t>(n));
  std::uint64_t streamed = 0;

  for (int round = 0;; ++round) {
    // Certify the chunk in parallel, then select sequentially in stream order.
    admissible.assign(chunk, -1.0);
    const std::uint64_t offset = streamed;
    kernels::for_blocks(chunk, exec, [&](std::uint64_t lo, std::uint64_t hi) {
      std::array<double, kMaxDim> buf{};
      std::span<double> x(buf.data(), static_cast<std::size_t>(n));
      for (std::uint64_t i = lo; i < hi; ++i)
        if (pool.attempt(offset + i, x)) admissible[i] = state.admissible_radius(x);
    });
    for (std::uint64_t i = 0; i < chunk; ++i) {
      if (admissible[i] < r) continue;
      pool.attempt(offset + i, point);
      if (grid.any_within(point, 2.0 * R, level.balls)) continue;
      grid.insert(point, static_cast<std::uint32_t>(level.balls.size()));
      level.balls.push_back({point, r});
      if (level.balls.size() > budget.max_balls)
        throw ConstructionFailure("pack_level: ball budget exceeded",
                                  "more than " + std::to_string(budget.max_balls) + " balls at radius " +
                                      std::to_string(r));
    }
    streamed += chunk;

    // Fresh sample: do the doubled enlargements cover half of the uncovered set?
    const BallSampler check(state.base(), stream_key(key, {fnv1a("cover"), static_cast<std::uint64_t>(round)}),
                            budget.coverage_samples);
    struct Tally {
      std::uint64_t hits = 0, total = 0;
    };
    const Tally t = kernels::block_reduce(
        budget.coverage_samples, exec, Tally{},
        [&](std::uint64_t lo, std::uint64_t hi) {
          Tally acc;
          std::array<double, kMaxDim> buf{};
          std::span<double> x(buf.data(), static_cast<std::size_t>(n));
          for (std::uint64_t i = lo; i < hi; ++i) {
            if (!check.attempt(i, x) || state.covered(x)) continue;
            ++acc.total;
            if (grid.any_within(x, 2.0 * R, level.balls)) ++acc.hits;
          }
          return acc;
        },
        [](Tally a, const Tally& b) {
          a.hits += b.hits;
          a.total += b.total;
          return a;
        });
    d.double_cover = wilson(t.hits, t.total);
    if (certifies_half(d.double_cover)) break;
    if (round >= 3) {
      std::ostringstream diagtxt;
      diagtxt << "radius " << r << ": doubled enlargements cover " << d.double_cover.p << " (99% lower "
              << d.double_cover.lower << ") of the uncovered set after " << streamed << " candidates";
      throw ConstructionFailure("pack_level: could not certify half coverage", diagtxt.str());
    }
  }

  double vol = 0.0;
  for (const Ball& b : level.balls) vol += cross_section_area(b.radius, n);
  d.balls = level.balls.size();
  d.candidates = streamed;
  d.uncovered_after = std::max(0.0, uncovered - vol);
  d.covered_fraction = uncovered > 0.0 ? vol / uncovered : 0.0;
  if (diag) {
    d.k = diag->k;
    d.l = diag->l;
    d.halvings = diag->halvings;
    d.far_fraction = diag->far_fraction;
    *diag = d;
  }
  return level;
}

// ---- stages and family --------------------------------------------------------------

StageResult build_stage(int k, double r_prev, const BuildConfig& cfg, kernels::Exec exec) {
  StageResult out;
  out.k = k;
  const double E = cfg.enlargement_for(k);
  const double threshold = cfg.stop_threshold(k);
  StageState state({base_center(cfg.n), cfg.s}, E);
  double r_level = r_prev;
  std::size_t total = 0;

  while (state.uncovered_measure() > threshold) {
    const int l = static_cast<int>(out.levels.size()) + 1;
    if (l > cfg.budgets.max_levels) {
      std::ostringstream diagtxt;
      diagtxt << "stage " << k << " still has uncovered measure " << state.uncovered_measure() << " > "
              << threshold << " after " << cfg.budgets.max_levels << " levels";
      throw ConstructionFailure("build_stage: level cap exceeded", diagtxt.str());
    }
    state.prepare(r_level);
    const auto lk = static_cast<std::uint64_t>(l);
    const auto kk = static_cast<std::uint64_t>(k);
    RadiusChoice choice;
    try {
      choice = choose_level_radius(state, r_level, cfg.budgets, stream_key(cfg.seed, {kk, lk, fnv1a("radius")}), exec);
    } catch (const NeedsMoreSamples& e) {
      throw ConstructionFailure("build_stage: level radius not certified",
                                "stage " + std::to_string(k) + " level " + std::to_string(l) + ": " + e.what());
    }
    LevelDiagnostics d;
    d.k = k;
    d.l = l;
    d.halvings = choice.halvings;
    d.far_fraction = choice.far_fraction;
    BuildBudgets budgets = cfg.budgets;
    budgets.max_balls = cfg.budgets.max_balls - std::min<std::uint64_t>(total, cfg.budgets.max_balls);
    LevelFamily level;
    try {
      level = pack_level(state, choice.radius, budgets, stream_key(cfg.seed, {kk, lk, fnv1a("pack")}), &d, exec);
    } catch (const ConstructionFailure& e) {
      throw ConstructionFailure(e.what(), "stage " + std::to_string(k) + " level " + std::to_string(l) + ": " +
                                              e.diagnostics());
    }
    if (level.balls.empty()) {
      throw ConstructionFailure("build_stage: empty level", "stage " + std::to_string(k) + " level " +
                                                                std::to_string(l) + " selected no balls");
    }
    level.k = k;
    level.l = l;
    total += level.balls.size();
    state.add(level.balls);
    out.levels.push_back(std::move(level));
    out.diagnostics.push_back(d);
    r_level = choice.radius;
  }
  out.r_k = r_level;
  return out;
}

std::vector<HoleRecord> lift(std::span<const LevelFamily> levels, const AffinePlane& plane, int k, std::uint64_t m) {
  std::vector<HoleRecord> out;
  for (const LevelFamily& level : levels) {
    for (std::size_t i = 0; i < level.balls.size(); ++i) {
      const Ball& b = level.balls[i];
      HoleRecord rec;
      rec.k = k;
      rec.l = level.l;
      rec.m = m;
      rec.selection = static_cast<std::uint32_t>(i);
      rec.base_center = b.center;
      rec.t = b.radius;
      rec.lifted_center = b.center;
      rec.lifted_center.push_back(plane(b.center) + 2.0 * b.radius);
      out.push_back(std::move(rec));
    }
  }
  return out;
}

FamilyHeader make_header(const BuildConfig& cfg) {
  FamilyHeader h;
  h.n = cfg.n;
  h.s = cfg.s;
  h.r = cfg.r;
  h.L = cfg.L;
  h.E = cfg.enlargement;
  h.epsilons = cfg.epsilons;
  h.stop_fractions = cfg.stop_fractions;
  h.strict = cfg.strict;
  h.seed = cfg.seed;
  h.config_hash = cfg.config_hash;
  return h;
}

BuildConfig config_from_header(const FamilyHeader& h) {
  BuildConfig c;
  c.n = h.n;
  c.s = h.s;
  c.r = h.r;
  c.L = h.L;
  c.enlargement = h.E;
  c.epsilons = h.epsilons;
  c.stop_fractions = h.stop_fractions;
  c.strict = h.strict;
  c.seed = h.seed;
  c.config_hash = h.config_hash;
  return c;
}

double FamilyHeader::enlargement_for(int k) const { return config_from_header(*this).enlargement_for(k); }
double FamilyHeader::stop_fraction(int k) const { return config_from_header(*this).stop_fraction(k); }

std::vector<std::uint32_t> HoleFamily::stage_members(int k) const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < records.size(); ++i)
    if (records[i].k == k) out.push_back(i);
  return out;
}

double HoleFamily::stage_radius(int k) const {
  if (k == 0) return header.s;
  double r = 0.0;
  for (const HoleRecord& rec : records)
    if (rec.k == k && (r == 0.0 || rec.t < r)) r = rec.t;
  return r;
}

std::vector<double> HoleFamily::level_radii(int k) const {
  std::vector<double> out;
  for (const HoleRecord& rec : records) {
    if (rec.k != k) continue;
    if (static_cast<int>(out.size()) < rec.l) out.resize(static_cast<std::size_t>(rec.l), 0.0);
    out[static_cast<std::size_t>(rec.l - 1)] = rec.t;
  }
  return out;
}

BuildResult build_family(const BuildConfig& cfg, kernels::Exec exec) {
  cfg.validate();
  const FeasibilityEstimate f = estimate_feasibility(cfg);
  if (!f.feasible) throw ConstructionFailure("build refused: infeasible parameters", f.message);

  BuildResult out;
  out.family.header = make_header(cfg);
  const PlaneCatalog planes(cfg.n, cfg.r);
  double r_prev = cfg.s;
  for (int k = 1; k <= cfg.depth(); ++k) {
    BuildConfig stage_cfg = cfg;
    stage_cfg.budgets.max_balls = cfg.budgets.max_balls - std::min<std::uint64_t>(out.family.records.size(), cfg.budgets.max_balls);
    StageResult stage = build_stage(k, r_prev, stage_cfg, exec);
    const std::uint64_t m = m_sequence(static_cast<std::uint64_t>(k));
    auto recs = lift(stage.levels, planes.plane(m), k, m);
    out.family.records.insert(out.family.records.end(), recs.begin(), recs.end());
    out.levels.insert(out.levels.end(), stage.diagnostics.begin(), stage.diagnostics.end());
    r_prev = stage.r_k;
  }
  return out;
}

// ---- unions -------------------------------------------------------------------------

HoleUnion::HoleUnion(const HoleFamily& family, std::vector<std::uint32_t> members, double scale)
    : members_(std::move(members)), scale_(scale) {
  std::vector<Ball> balls;
  balls.reserve(members_.size());
  for (auto i : members_) balls.push_back(family.records[i].hole());
  index_ = BallIndex(std::move(balls), {scale, 0.0});
}

std::vector<std::uint32_t> HoleUnion::containing(std::span<const double> x) const {
  std::vector<std::uint32_t> out;
  for (auto id : index_.query(x)) out.push_back(members_[id]);
  return out;
}

PkDescriptor assemble_Pk(const HoleFamily& family, double L, int k) {
  if (k < 1) throw InvalidArgument("assemble_Pk: k must be >= 1");
  std::vector<std::uint32_t> members;
  for (std::uint32_t i = 0; i < family.records.size(); ++i)
    if (2.0 * family.records[i].t < 1.0 / k) members.push_back(i);
  return {k, HoleUnion(family, std::move(members), L)};
}

HoleUnion assemble_H(const HoleFamily& family) {
  std::vector<std::uint32_t> all(family.records.size());
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
  return HoleUnion(family, std::move(all), 1.0);
}

TruncatedP::TruncatedP(const HoleFamily& family, double L, int K) : h_(assemble_H(family)) {
  for (int k = 1; k <= K; ++k) pk_.push_back(assemble_Pk(family, L, k));
}

bool TruncatedP::contains(std::span<const double> x) const {
  for (const PkDescriptor& p : pk_)
    if (!p.set.contains(x)) return false;
  return !h_.contains(x);
}

bool truncated_p_reference(const HoleFamily& family, double L, int K, std::span<const double> x) {
  for (int k = 1; k <= K; ++k) {
    bool in = false;
    for (const HoleRecord& rec : family.records)
      if (2.0 * rec.t < 1.0 / k && distance(x, rec.lifted_center) < L * rec.t) in = true;
    if (!in) return false;
  }
  for (const HoleRecord& rec : family.records)
    if (distance(x, rec.lifted_center) < rec.t) return false;
  return true;
}

}  // namespace porous
