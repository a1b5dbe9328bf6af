#include "lastzero/path_sim.hpp"

#include "lastzero/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace lastzero {

// ---------------------------------------------------------------- walker

PathWalker::PathWalker(const LevyModel& model, double x0, double horizon, double dt, std::uint64_t seed,
                       std::uint64_t path_index)
    : model_(&model), horizon_(horizon), dt_(dt), inc_(seed, path_index, Stream::Increments),
      jumps_(seed, path_index, Stream::Jumps), mins_(seed, path_index, Stream::BridgeMin), t_(0.0), x_(x0)
{
    if (!(dt > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("PathWalker: dt and horizon must be positive");
    next_jump_ = model.has_jumps() ? jumps_.exponential(model.lambda()) : std::numeric_limits<double>::infinity();
}

PathWalker::PathWalker(const LevyModel& model, double x0, const std::vector<double>& grid, std::uint64_t seed,
                       std::uint64_t path_index)
    : model_(&model), horizon_(grid.back()), dt_(0.0), grid_(&grid), inc_(seed, path_index, Stream::Increments),
      jumps_(seed, path_index, Stream::Jumps), mins_(seed, path_index, Stream::BridgeMin), t_(0.0), x_(x0)
{
    if (grid.size() < 2 || grid.front() != 0.0) throw std::invalid_argument("PathWalker: grid must start at 0");
    next_jump_ = model.has_jumps() ? jumps_.exponential(model.lambda()) : std::numeric_limits<double>::infinity();
}

double PathWalker::grid_time(std::int64_t k) const
{
    if (grid_) return (*grid_)[static_cast<size_t>(k)];
    return std::min(static_cast<double>(k) * dt_, horizon_);
}

bool PathWalker::next(Segment& seg)
{
    std::int64_t last = grid_ ? static_cast<std::int64_t>(grid_->size()) - 1
                              : static_cast<std::int64_t>(std::ceil(horizon_ / dt_ - 1e-9));
    if (k_ >= last) return false;
    double target = grid_time(k_ + 1);
    bool jump = next_jump_ < target;
    double end = jump ? next_jump_ : target;
    double dt = end - t_;
    double sig = model_->sigma();
    double x1 = x_ + model_->drift() * dt;
    if (sig > 0.0) x1 += sig * std::sqrt(dt) * inc_.normal();

    seg.index = seg_;
    seg.t0 = t_;
    seg.t1 = end;
    seg.x0 = x_;
    seg.x1 = x1;
    seg.jump = jump;
    seg.min = std::min(x_, x1);
    if (sig > 0.0) {
        // the bridge minimum is only sampled when it can reach min_level
        double var = sig * sig * dt;
        if (x1 <= min_level_ || 2.0 * (x_ - min_level_) * (x1 - min_level_) < 60.0 * var)
            seg.min = bridge_minimum(x_, x1, var, mins_.uniform_at(seg_));
    }
    if (jump) {
        seg.x1_after = x1 - jumps_.exponential(model_->rho());
        next_jump_ = end + jumps_.exponential(model_->lambda());
    } else {
        seg.x1_after = x1;
        ++k_;
    }
    at_grid_ = !jump;
    t_ = end;
    x_ = seg.x1_after;
    ++seg_;
    return true;
}

// ---------------------------------------------------------------- skeleton

PathSkeleton simulate_skeleton(const LevyModel& model, double x0, double horizon, double dt, std::uint64_t seed,
                               std::uint64_t path_index)
{
    PathSkeleton s;
    s.x0 = x0;
    s.sigma = model.sigma();
    s.drift = model.drift();
    s.seed = seed;
    s.path_index = path_index;
    s.times.push_back(0.0);
    s.values.push_back(x0);
    s.left_values.push_back(x0);
    s.jump_flags.push_back(0);
    PathWalker w(model, x0, horizon, dt, seed, path_index);
    Segment seg;
    while (w.next(seg)) {
        s.times.push_back(seg.t1);
        s.values.push_back(seg.x1_after);
        s.left_values.push_back(seg.x1);
        s.jump_flags.push_back(seg.jump ? 1 : 0);
    }
    return s;
}

namespace {

// Latest time in [t0, t1] at which the segment is <= 0, or -1.
double segment_last_zero(const Segment& s)
{
    if (s.x1_after <= 0.0) return s.t1;
    if (s.min > 0.0) return -1.0;
    double d = s.t1 - s.t0;
    if (s.x0 <= 0.0) return s.t0 + d * (-s.x0) / (s.x1 - s.x0);
    // dip between two positive endpoints
    return s.t0 + d * s.x0 / (s.x0 + s.x1);
}

Segment segment_of(const PathSkeleton& sk, size_t i)
{
    Segment s;
    s.index = i - 1;
    s.t0 = sk.times[i - 1];
    s.t1 = sk.times[i];
    s.x0 = sk.values[i - 1];
    s.x1 = sk.left_values[i];
    s.x1_after = sk.values[i];
    s.jump = sk.jump_flags[i] != 0;
    s.min = sk.segment_min[i];
    return s;
}

double normal_at(const CounterRng& r, std::uint64_t c)
{
    double u1 = r.uniform_at(2 * c), u2 = r.uniform_at(2 * c + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

struct RuleState {
    bool fired = false;
    double tau = 0.0, u_at = 0.0, x_at = 0.0;
};

// Tracks the excursion clock and fires stopping rules along a stream of segments.
class RuleScanner {
public:
    RuleScanner(const std::vector<const StoppingRule*>& rules, double x0, double u0, double sigma,
                std::uint64_t seed, std::uint64_t path)
        : rules_(rules), state_(rules.size()), sigma_(sigma), refine_(seed, path, Stream::Refine)
    {
        last_ = x0 <= 0.0 ? 0.0 : -u0;
        g_ = 0.0;
        for (size_t r = 0; r < rules_.size(); ++r) {
            auto k = rules_[r]->kind();
            if (k == StoppingRule::Kind::Immediate) fire(r, 0.0, u0, x0);
            else if (k == StoppingRule::Kind::Oracle) ++pending_oracle_;
            else if (x0 > 0.0 && x0 >= rules_[r]->threshold(u0)) fire(r, 0.0, u0, x0);
        }
    }

    void process(const Segment& s)
    {
        double zt = segment_last_zero(s);
        cached_ = false;
        for (size_t r = 0; r < rules_.size(); ++r) {
            if (state_[r].fired) continue;
            auto k = rules_[r]->kind();
            if (k == StoppingRule::Kind::Barrier || k == StoppingRule::Kind::Boundary) check(r, s, zt);
        }
        if (zt >= 0.0) { last_ = zt; g_ = zt; }
    }

    // Any rule still waiting for a crossing (oracle rules wait for the end).
    bool active() const { return fired_ + pending_oracle_ < rules_.size(); }
    double last_zero() const { return std::max(g_, 0.0); }
    double clock_origin() const { return last_; }
    const RuleState& state(size_t r) const { return state_[r]; }

    void finish(double horizon)
    {
        for (size_t r = 0; r < rules_.size(); ++r)
            if (rules_[r]->kind() == StoppingRule::Kind::Oracle) {
                state_[r].fired = true;
                state_[r].tau = last_zero();
            } else if (!state_[r].fired) {
                state_[r].tau = horizon;
            }
    }

private:
    void fire(size_t r, double t, double u, double x)
    {
        state_[r].fired = true;
        state_[r].tau = t;
        state_[r].u_at = u;
        state_[r].x_at = x;
        ++fired_;
    }

    void check(size_t r, const Segment& s, double zt)
    {
        const StoppingRule& rule = *rules_[r];
        if (zt >= 0.0) {
            // the excursion restarts inside the segment; test the endpoint only
            if (s.x1_after <= 0.0) return;
            double u1 = s.t1 - zt;
            if (s.x1 >= rule.threshold(u1)) fire(r, s.t1, u1, s.x1);
            return;
        }
        double u0 = s.t0 - last_, d = s.t1 - s.t0;
        double d0 = rule.threshold(u0) - s.x0;
        if (d0 <= 0.0) { fire(r, s.t0, u0, s.x0); return; }
        double d1 = rule.threshold(u0 + d) - s.x1;
        if (sigma_ == 0.0) {
            if (d1 > 0.0) return;
            locate_linear(r, s, u0);
            return;
        }
        if (d1 > 0.0 && -2.0 * d0 * d1 / (sigma_ * sigma_ * d) < -27.6) return;  // P < 1e-12
        subgrid(s);
        const double dd = d / kSub;
        for (int j = 0; j < kSub; ++j) {
            double sa = s.t0 + j * dd;
            double da = rule.threshold(u0 + j * dd) - sub_[j];
            double db = rule.threshold(u0 + (j + 1) * dd) - sub_[j + 1];
            if (da <= 0.0) { fire(r, sa, u0 + j * dd, sub_[j]); return; }
            if (db <= 0.0) {
                double w = da / (da - db);
                fire(r, sa + w * dd, u0 + (j + w) * dd, sub_[j] + w * (sub_[j + 1] - sub_[j]));
                return;
            }
            double p = std::exp(-2.0 * da * db / (sigma_ * sigma_ * dd));
            if (refine_.uniform_at(s.index * 64 + 40 + j) < p) {
                double w = da / (da + db);
                double uf = u0 + (j + w) * dd;
                fire(r, sa + w * dd, uf, rule.threshold(uf));
                return;
            }
        }
    }

    // Straight-line segment: x - b(U) is increasing, so the first sub-point
    // at or above the threshold brackets the crossing.
    void locate_linear(size_t r, const Segment& s, double u0)
    {
        const StoppingRule& rule = *rules_[r];
        double d = s.t1 - s.t0, dd = d / kSub;
        double prev = rule.threshold(u0) - s.x0;
        for (int j = 1; j <= kSub; ++j) {
            double x = s.x0 + (s.x1 - s.x0) * j / kSub;
            double cur = rule.threshold(u0 + j * dd) - x;
            if (cur <= 0.0) {
                double w = prev / (prev - cur);
                double t = s.t0 + (j - 1 + w) * dd;
                fire(r, t, t - last_, s.x0 + (s.x1 - s.x0) * (t - s.t0) / d);
                return;
            }
            prev = cur;
        }
        fire(r, s.t1, s.t1 - last_, s.x1);
    }

    // Brownian bridge sampled at kSub + 1 equispaced points, shared by all rules.
    void subgrid(const Segment& s)
    {
        if (cached_) return;
        cached_ = true;
        double d = s.t1 - s.t0, dd = d / kSub;
        sub_[0] = s.x0;
        sub_[kSub] = s.x1;
        for (int j = 1; j < kSub; ++j) {
            double rem = d - (j - 1) * dd;
            double mean = sub_[j - 1] + (s.x1 - sub_[j - 1]) * dd / rem;
            double var = sigma_ * sigma_ * dd * (rem - dd) / rem;
            sub_[j] = mean + std::sqrt(var) * normal_at(refine_, s.index * 32 + j);
        }
    }

    static constexpr int kSub = 16;
    std::vector<const StoppingRule*> rules_;
    std::vector<RuleState> state_;
    double sigma_;
    CounterRng refine_;
    double last_ = 0.0, g_ = 0.0;
    size_t fired_ = 0, pending_oracle_ = 0;
    bool cached_ = false;
    double sub_[kSub + 1] = {};
};

double tail_at(const ScaleFamily& fam, double x)
{
    if (x <= 0.0) return 1.0;
    return std::max(0.0, 1.0 - fam.model().psi_prime(0.0) * fam.w(x));
}

MCEstimate summarise(const std::vector<double>& v, std::uint64_t seed)
{
    MCEstimate e;
    e.n_paths = static_cast<std::int64_t>(v.size());
    e.master_seed = seed;
    double mean = 0.0, m2 = 0.0;
    std::int64_t n = 0;
    for (double x : v) {
        ++n;
        double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    e.mean = mean;
    e.stderr_mean = n > 1 ? std::sqrt(m2 / (n - 1) / n) : 0.0;
    return e;
}

}  // namespace

PathSkeleton detect_zero_crossings(PathSkeleton sk)
{
    CounterRng mins(sk.seed, sk.path_index, Stream::BridgeMin);
    size_t n = sk.times.size();
    sk.segment_min.assign(n, sk.x0);
    sk.crossing_times.clear();
    sk.last_nonpositive = 0.0;
    for (size_t i = 1; i < n; ++i) {
        double a = sk.values[i - 1], b = sk.left_values[i], dt = sk.times[i] - sk.times[i - 1];
        sk.segment_min[i] = sk.sigma > 0.0 ? bridge_minimum(a, b, sk.sigma * sk.sigma * dt, mins.uniform_at(i - 1))
                                           : std::min(a, b);
        Segment s = segment_of(sk, i);
        double z = segment_last_zero(s);
        if (z >= 0.0) {
            sk.last_nonpositive = z;
            if (s.x1_after > 0.0) sk.crossing_times.push_back(z);
        }
    }
    sk.augmented = true;
    return sk;
}

LastZero last_zero(const PathSkeleton& sk, const ScaleFamily& fam)
{
    if (!sk.augmented) throw std::invalid_argument("last_zero: skeleton not augmented");
    LastZero lz;
    lz.g_hat = sk.last_nonpositive;
    lz.tail_bound = tail_at(fam, sk.values.back());
    return lz;
}

// ---------------------------------------------------------------- rules

StoppingRule StoppingRule::immediate() { return StoppingRule(); }

StoppingRule StoppingRule::barrier(double a)
{
    if (!(a >= 0.0)) throw std::invalid_argument("barrier level must be nonnegative");
    StoppingRule r;
    r.kind_ = Kind::Barrier;
    r.level_ = a;
    return r;
}

StoppingRule StoppingRule::boundary(std::shared_ptr<const BoundaryCurve> curve)
{
    if (!curve || curve->empty()) throw std::invalid_argument("boundary rule needs a curve");
    StoppingRule r;
    r.kind_ = Kind::Boundary;
    r.curve_ = std::move(curve);
    return r;
}

StoppingRule StoppingRule::oracle()
{
    StoppingRule r;
    r.kind_ = Kind::Oracle;
    return r;
}

std::string StoppingRule::label() const
{
    switch (kind_) {
    case Kind::Immediate: return "immediate";
    case Kind::Barrier: return "barrier:" + format_number(level_);
    case Kind::Boundary: return "boundary";
    case Kind::Oracle: return "oracle";
    }
    return "unknown";
}

StoppingOutcome apply_rule(const PathSkeleton& sk, const StoppingRule& rule, const ScaleFamily& fam)
{
    if (!sk.augmented) throw std::invalid_argument("apply_rule: skeleton not augmented");
    std::vector<const StoppingRule*> rules{&rule};
    RuleScanner scan(rules, sk.x0, 0.0, sk.sigma, sk.seed, sk.path_index);
    for (size_t i = 1; i < sk.times.size() && scan.active(); ++i) scan.process(segment_of(sk, i));
    scan.finish(sk.times.back());
    StoppingOutcome out;
    const RuleState& st = scan.state(0);
    out.tau = st.tau;
    out.censored = !st.fired;
    out.u_at_tau = st.fired ? st.u_at : sk.times.back() - scan.clock_origin();
    out.x_at_tau = st.fired ? st.x_at : sk.values.back();
    out.g_hat = sk.last_nonpositive;
    out.censor_prob_bound = out.censored ? 1.0 : tail_at(fam, sk.values.back());
    if (rule.kind() == StoppingRule::Kind::Oracle) {
        out.tau = out.g_hat;
        out.censored = false;
    }
    return out;
}

// ---------------------------------------------------------------- estimators

void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& body)
{
    int nt = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (nt <= 1 || n < 1024) {
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    const std::int64_t block = 256;
    auto work = [&]() {
        for (;;) {
            std::int64_t b = next.fetch_add(block);
            if (b >= n) return;
            for (std::int64_t i = b; i < std::min(n, b + block); ++i) body(i);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
}

double safe_level(const ScaleFamily& fam, double eps)
{
    double hi = 1.0;
    while (tail_at(fam, hi) > eps) hi *= 2.0;
    return bisect_root([&](double x) { return tail_at(fam, x) - eps; }, 0.0, hi, 1e-6);
}

std::vector<MCEstimate> estimate_prediction_errors(const LevyModel& model, const std::vector<StoppingRule>& rules,
                                                   const MomentOrder& order, double x0, const SimBudget& b)
{
    ScaleFamily fam(model);
    const double p = order.p();
    const double level = safe_level(fam);
    const size_t nr = rules.size();
    std::vector<const StoppingRule*> ptrs;
    for (const auto& r : rules) ptrs.push_back(&r);
    std::vector<double> loss(static_cast<size_t>(b.n_paths) * nr), cens(static_cast<size_t>(b.n_paths) * nr);

    parallel_for(b.n_paths, b.threads, [&](std::int64_t i) {
        PathWalker w(model, x0, b.horizon, b.dt, b.seed, static_cast<std::uint64_t>(i));
        RuleScanner scan(ptrs, x0, 0.0, model.sigma(), b.seed, static_cast<std::uint64_t>(i));
        Segment s;
        bool early = false;
        while (w.next(s)) {
            scan.process(s);
            if (!scan.active() && w.value() > level) { early = true; break; }
        }
        scan.finish(b.horizon);
        double g = scan.last_zero();
        double tail = early ? 1e-12 : tail_at(fam, w.value());
        for (size_t r = 0; r < nr; ++r) {
            const RuleState& st = scan.state(r);
            size_t k = static_cast<size_t>(i) * nr + r;
            loss[k] = std::pow(std::abs(st.tau - g), p);
            cens[k] = st.fired ? tail : 1.0;
        }
    });

    std::vector<MCEstimate> out;
    for (size_t r = 0; r < nr; ++r) {
        std::vector<double> v(static_cast<size_t>(b.n_paths));
        double c = 0.0;
        for (std::int64_t i = 0; i < b.n_paths; ++i) {
            v[static_cast<size_t>(i)] = loss[static_cast<size_t>(i) * nr + r];
            c += cens[static_cast<size_t>(i) * nr + r];
        }
        MCEstimate e = summarise(v, b.seed);
        e.censored_fraction = c / static_cast<double>(b.n_paths);
        e.unreliable = e.mean > 0.0 ? e.censored_fraction * std::pow(b.horizon, p) > 0.01 * e.mean
                                    : e.censored_fraction > 2e-3;
        out.push_back(e);
    }
    return out;
}

MCEstimate estimate_prediction_error(const LevyModel& model, const StoppingRule& rule, const MomentOrder& p,
                                     double x0, const SimBudget& budget)
{
    return estimate_prediction_errors(model, {rule}, p, x0, budget).front();
}

Functional Functional::laplace_g(double q, double x)
{
    Functional f;
    f.kind = Kind::LaplaceG;
    f.param = q;
    f.x = x;
    return f;
}

Functional Functional::exit_up_before_down(double x, double a)
{
    Functional f;
    f.kind = Kind::ExitUpBeforeDown;
    f.x = x;
    f.param = a;
    return f;
}

Functional Functional::ruin_prob(double x)
{
    Functional f;
    f.kind = Kind::RuinProb;
    f.x = x;
    return f;
}

Functional Functional::g_cdf(double x, double gamma)
{
    Functional f;
    f.kind = Kind::GCdf;
    f.x = x;
    f.param = gamma;
    return f;
}

Functional Functional::mean_drift(double x)
{
    Functional f;
    f.kind = Kind::MeanDrift;
    f.x = x;
    return f;
}

Functional Functional::jump_count()
{
    Functional f;
    f.kind = Kind::JumpCount;
    return f;
}

Functional Functional::exit_time_interval(double x, double a)
{
    Functional f;
    f.kind = Kind::ExitTimeInterval;
    f.x = x;
    f.param = a;
    return f;
}

Functional Functional::integral_to_up_crossing(double x, std::function<double(double)> fn)
{
    Functional f;
    f.kind = Kind::IntegralToUpCrossing;
    f.x = x;
    f.f1 = std::move(fn);
    return f;
}

Functional Functional::value_under_rule(double u, double x, StoppingRule rule,
                                        std::function<double(double, double)> gain)
{
    Functional f;
    f.kind = Kind::ValueUnderRule;
    f.u = u;
    f.x = x;
    f.rule = std::make_shared<StoppingRule>(std::move(rule));
    f.f2 = std::move(gain);
    return f;
}

namespace {

// Time at which a segment first leaves (-inf, level) upwards, or -1.
double up_crossing_time(const Segment& s, double level, double sigma, double u)
{
    double d = s.t1 - s.t0;
    if (s.x0 >= level) return s.t0;
    if (s.x1 >= level) return s.t0 + d * (level - s.x0) / (s.x1 - s.x0);
    if (sigma == 0.0) return -1.0;
    double a = level - s.x0, b = level - s.x1;
    if (u < std::exp(-2.0 * a * b / (sigma * sigma * d))) return s.t0 + d * a / (a + b);
    return -1.0;
}

// Time at which a segment first goes strictly below 0, or -1.
double down_crossing_time(const Segment& s)
{
    double d = s.t1 - s.t0;
    if (s.min < 0.0) {
        if (s.x0 <= 0.0) return s.t0;
        if (s.x1 < 0.0) return s.t0 + d * s.x0 / (s.x0 - s.x1);
        return s.t0 + d * s.x0 / (s.x0 + s.x1);
    }
    if (s.x1_after < 0.0) return s.t1;
    return -1.0;
}

}  // namespace

MCEstimate estimate_functional(const LevyModel& model, const Functional& fn, const SimBudget& b)
{
    ScaleFamily fam(model);
    const double level = safe_level(fam);
    const double sig = model.sigma();
    std::vector<double> val(static_cast<size_t>(b.n_paths)), cens(static_cast<size_t>(b.n_paths), 0.0);
    std::vector<const StoppingRule*> ptrs;
    if (fn.rule) ptrs.push_back(fn.rule.get());

    parallel_for(b.n_paths, b.threads, [&](std::int64_t i) {
        const auto pi = static_cast<std::uint64_t>(i);
        PathWalker w(model, fn.x, b.horizon, b.dt, b.seed, pi);
        CounterRng aux(b.seed, pi, Stream::Auxiliary);
        Segment s;
        double v = 0.0, c = 0.0;
        switch (fn.kind) {
        case Functional::Kind::LaplaceG:
        case Functional::Kind::GCdf: {
            double g = 0.0;
            bool early = false;
            while (w.next(s)) {
                double z = segment_last_zero(s);
                if (z >= 0.0) g = z;
                if (w.value() > level) { early = true; break; }
            }
            c = early ? 0.0 : tail_at(fam, w.value());
            v = fn.kind == Functional::Kind::LaplaceG ? std::exp(-fn.param * g) : (g <= fn.param ? 1.0 : 0.0);
            break;
        }
        case Functional::Kind::RuinProb: {
            bool early = false;
            if (fn.x < 0.0) { v = 1.0; break; }
            while (w.next(s)) {
                if (down_crossing_time(s) >= 0.0) { v = 1.0; break; }
                if (w.value() > level) { early = true; break; }
            }
            if (v == 0.0 && !early) c = tail_at(fam, w.value());
            break;
        }
        case Functional::Kind::ExitUpBeforeDown:
        case Functional::Kind::ExitTimeInterval: {
            const double a = fn.param;
            double t_exit = -1.0;
            bool up = false;
            if (fn.x >= a) { t_exit = 0.0; up = true; }
            else if (fn.x < 0.0) { t_exit = 0.0; }
            while (t_exit < 0.0 && w.next(s)) {
                double td = s.min < 0.0 ? down_crossing_time(s) : -1.0;
                double tu = up_crossing_time(s, a, sig, aux.uniform_at(s.index));
                if (tu >= 0.0 && (td < 0.0 || tu < td)) { t_exit = tu; up = true; }
                else if (td >= 0.0) { t_exit = td; }
                else if (s.x1_after < 0.0) { t_exit = s.t1; }
            }
            if (t_exit < 0.0) { c = 1.0; t_exit = b.horizon; }
            v = fn.kind == Functional::Kind::ExitUpBeforeDown ? (up ? 1.0 : 0.0) : t_exit;
            break;
        }
        case Functional::Kind::MeanDrift: {
            while (w.next(s)) {}
            v = (w.value() - fn.x) / b.horizon;
            break;
        }
        case Functional::Kind::JumpCount: {
            while (w.next(s))
                if (s.jump) v += 1.0;
            break;
        }
        case Functional::Kind::IntegralToUpCrossing: {
            bool done = fn.x >= 0.0;
            double fa = fn.f1(fn.x);
            while (!done && w.next(s)) {
                double tu = up_crossing_time(s, 0.0, sig, aux.uniform_at(s.index));
                if (tu >= 0.0) {
                    v += 0.5 * (tu - s.t0) * (fa + fn.f1(0.0));
                    done = true;
                } else {
                    double fb = fn.f1(s.x1);
                    v += 0.5 * (s.t1 - s.t0) * (fa + fb);
                    fa = s.jump ? fn.f1(s.x1_after) : fb;
                }
            }
            if (!done) c = 1.0;
            break;
        }
        case Functional::Kind::ValueUnderRule: {
            RuleScanner scan(ptrs, fn.x, fn.u, sig, b.seed, pi);
            double ga = fn.f2(fn.u, fn.x);
            while (scan.active() && w.next(s)) {
                double origin = scan.clock_origin();
                scan.process(s);
                const RuleState& st = scan.state(0);
                if (st.fired) {
                    v += 0.5 * (st.tau - s.t0) * (ga + fn.f2(st.u_at, st.x_at));
                    break;
                }
                double z = segment_last_zero(s);
                double u1 = s.t1 - (z >= 0.0 ? z : origin);
                double gb = fn.f2(u1, s.x1);
                v += 0.5 * (s.t1 - s.t0) * (ga + gb);
                ga = s.jump ? fn.f2(s.x1_after <= 0.0 ? 0.0 : u1, s.x1_after) : gb;
            }
            if (!scan.state(0).fired) c = 1.0;
            break;
        }
        }
        val[static_cast<size_t>(i)] = v;
        cens[static_cast<size_t>(i)] = c;
    });

    MCEstimate e = summarise(val, b.seed);
    double c = 0.0;
    for (double x : cens) c += x;
    e.censored_fraction = c / static_cast<double>(b.n_paths);
    e.unreliable = e.censored_fraction > 2e-3;
    return e;
}

}  // namespace lastzero
