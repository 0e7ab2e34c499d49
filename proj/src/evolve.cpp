#include "qwave/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>
#include <utility>

#include "qwave/errors.hpp"
#include "qwave/numerics.hpp"

namespace qwave::evolve {

namespace {

struct GuardReading {
    double sup_u = 0.0;
    double max_a = 0.0;
};

std::string describe(const char* what, double t, double r, double u) {
    std::ostringstream os;
    os << what << " at t=" << t << ", r=" << r << ", u=" << u;
    return os.str();
}

// Checks finiteness and the model domain; with a positive guard also sup|u|.
GuardReading check_level(const WaveState& s, const CoefficientModel& model, double u_guard) {
    GuardReading g;
    for (std::size_t i = 0; i < s.v.size(); ++i) {
        const double u = s.u_at(i);
        if (!std::isfinite(u)) throw NonFinite(describe("non-finite value", s.t, s.grid.r(i), u), s.t);
        if (!model.admissible(u))
            throw CoefficientDomainExceeded(
                describe("u left the admissible domain of the coefficient", s.t, s.grid.r(i), u),
                s.t, s.grid.r(i), u);
        if (u_guard > 0.0 && std::abs(u) > u_guard)
            throw CoefficientDomainExceeded(describe("sup|u| exceeded the guard", s.t, s.grid.r(i), u),
                                            s.t, s.grid.r(i), u);
        g.sup_u = std::max(g.sup_u, std::abs(u));
        g.max_a = std::max(g.max_a, model(u));
    }
    return g;
}

WaveState taylor_start(const WaveState& cur, const CoefficientModel& model, double dt) {
    const std::size_t m = cur.v.size();
    const double inv_h2 = 1.0 / (cur.grid.h * cur.grid.h);
    WaveState next{cur.t + dt, cur.grid, cur.v, cur.w};
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double a = model(cur.u_at(i));
        const double acc = a * a * (cur.v[i + 1] - 2.0 * cur.v[i] + cur.v[i - 1]) * inv_h2;
        next.v[i] = cur.v[i] + dt * cur.w[i] + 0.5 * dt * dt * acc;
        next.w[i] = cur.w[i] + dt * acc;
    }
    next.v[0] = 0.0;
    next.w[0] = 0.0;
    return next;
}

double dense_value(std::span<const double> level, double H, double r, double* dr) {
    const std::size_t M = level.size() - 1;
    const double x = std::abs(r) / H;
    if (x >= static_cast<double>(M)) {
        if (dr) *dr = 0.0;
        return level[M];
    }
    const auto j = static_cast<std::ptrdiff_t>(x);
    const double s = x - static_cast<double>(j);
    const auto w = numerics::cubic_weights(s);
    double val = 0.0, der = 0.0;
    for (std::ptrdiff_t q = 0; q < 4; ++q) {
        std::ptrdiff_t idx = j - 1 + q;
        if (idx < 0) idx = -idx;
        if (idx > static_cast<std::ptrdiff_t>(M)) idx = static_cast<std::ptrdiff_t>(M);
        const double a = level[static_cast<std::size_t>(idx)];
        val += w.w[q] * a;
        der += w.dw[q] * a;
    }
    if (dr) *dr = (r < 0.0 ? -der : der) / H;
    return val;
}

} // namespace

WaveState WaveState::from_data(const RadialProfile& f, const RadialProfile& g) {
    if (!(f.grid() == g.grid())) throw ArgumentError("displacement and velocity grids differ");
    WaveState s;
    s.grid = f.grid();
    s.v.resize(s.grid.nodes());
    s.w.resize(s.grid.nodes());
    for (std::size_t i = 0; i < s.v.size(); ++i) {
        s.v[i] = s.grid.r(i) * f[i];
        s.w[i] = s.grid.r(i) * g[i];
    }
    return s;
}

double WaveState::u_at(std::size_t i) const {
    if (i == 0) return (4.0 * v[1] - v[2]) / (2.0 * grid.h);
    return v[i] / grid.r(i);
}

std::vector<double> WaveState::u() const {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = u_at(i);
    return out;
}

std::vector<double> WaveState::ut() const {
    std::vector<double> out(w.size());
    out[0] = (4.0 * w[1] - w[2]) / (2.0 * grid.h);
    for (std::size_t i = 1; i < w.size(); ++i) out[i] = w[i] / grid.r(i);
    return out;
}

double cfl_dt(const WaveState& state, const CoefficientModel& model, double cfl) {
    if (!(cfl > 0.0)) throw ArgumentError("cfl must be positive");
    double amax = 0.0;
    for (std::size_t i = 0; i < state.v.size(); ++i) amax = std::max(amax, model(state.u_at(i)));
    if (!(amax > 0.0) || !std::isfinite(amax)) throw NonFinite("wave speed not positive and finite", state.t);
    return cfl * state.grid.h / amax;
}

WaveState advance(const WaveState& prev, const WaveState& cur, const CoefficientModel& model,
                  double dt_prev, double dt) {
    if (!(prev.grid == cur.grid) || prev.v.size() != cur.v.size())
        throw ArgumentError("levels live on different grids");
    if (dt == 0.0 || dt_prev == 0.0 || !std::isfinite(dt) || !std::isfinite(dt_prev))
        throw ArgumentError("time steps must be finite and nonzero");
    const std::size_t m = cur.v.size();
    if (m < 4) throw ArgumentError("grid too small");
    const double inv_h2 = 1.0 / (cur.grid.h * cur.grid.h);
    const double ratio = dt / dt_prev;
    const double c2 = 0.5 * dt * (dt + dt_prev);
    // backward three-point derivative weights at the new level
    const double wn = (2.0 * dt + dt_prev) / (dt * (dt + dt_prev));
    const double wc = -(dt + dt_prev) / (dt * dt_prev);
    const double wp = dt / (dt_prev * (dt + dt_prev));

    WaveState next{cur.t + dt, cur.grid, std::vector<double>(m), std::vector<double>(m)};
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double a = model(cur.u_at(i));
        const double lap = (cur.v[i + 1] - 2.0 * cur.v[i] + cur.v[i - 1]) * inv_h2;
        next.v[i] = cur.v[i] + ratio * (cur.v[i] - prev.v[i]) + c2 * a * a * lap;
    }
    next.v[0] = 0.0;
    next.v[m - 1] = cur.v[m - 1];
    for (std::size_t i = 0; i < m; ++i) next.w[i] = wn * next.v[i] + wc * cur.v[i] + wp * prev.v[i];
    if (!numerics::all_finite(next.v)) throw NonFinite("non-finite value after step", next.t);
    return next;
}

WaveState step(const WaveState& prev, const WaveState& cur, const CoefficientModel& model,
               double dt) {
    const double gap = cur.t - prev.t;
    if (std::abs(gap - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
        throw ArgumentError("dt does not match the spacing of the given levels");
    WaveState next = advance(prev, cur, model, dt, dt);
    for (std::size_t i = 0; i < next.v.size(); ++i) {
        const double u = next.u_at(i);
        if (!model.admissible(u))
            throw CoefficientDomainExceeded("u left the admissible domain of the coefficient",
                                            next.t, next.grid.r(i), u);
    }
    return next;
}

// RunHistory ----------------------------------------------------------------

RunHistory::RunHistory(Grid grid, const CoefficientModel& model, RunOptions options,
                       RadialProfile f, RadialProfile g)
    : grid_(grid), model_(model), options_(options), f_(std::move(f)), g_(std::move(g)) {
    dense_nodes_ = grid_.n / options_.dense_stride + 1;
}

void RunHistory::record_level(double t, double sup_u, const WaveState& s) {
    step_times_.push_back(t);
    step_sup_u_.push_back(sup_u);
    if (step_times_.size() > 1)
        step_sizes_.push_back(step_times_.back() - step_times_[step_times_.size() - 2]);
    const std::size_t stride = options_.dense_stride;
    for (std::size_t j = 0; j < dense_nodes_; ++j) dense_a_.push_back((*model_)(s.u_at(j * stride)));
}

std::vector<double> RunHistory::sample_times() const {
    std::vector<double> ts;
    ts.reserve(samples_.size());
    for (const auto& s : samples_) ts.push_back(s.state.t);
    return ts;
}

const ArchivedLevel& RunHistory::nearest_sample(double t) const {
    if (samples_.empty()) throw ArgumentError("history has no samples");
    auto it = std::lower_bound(samples_.begin(), samples_.end(), t,
                               [](const ArchivedLevel& l, double x) { return l.state.t < x; });
    if (it == samples_.end()) return samples_.back();
    if (it != samples_.begin() && std::abs(std::prev(it)->state.t - t) <= std::abs(it->state.t - t))
        return *std::prev(it);
    return *it;
}

double RunHistory::a_level(std::size_t k, double r) const {
    if (k >= step_times_.size()) throw ArgumentError("level index out of range");
    std::span<const double> lvl(dense_a_.data() + k * dense_nodes_, dense_nodes_);
    return dense_value(lvl, dense_h(), r, nullptr);
}

double RunHistory::a_r_level(std::size_t k, double r) const {
    if (k >= step_times_.size()) throw ArgumentError("level index out of range");
    std::span<const double> lvl(dense_a_.data() + k * dense_nodes_, dense_nodes_);
    double d = 0.0;
    dense_value(lvl, dense_h(), r, &d);
    return d;
}

std::size_t RunHistory::level_index(double t) const {
    if (step_times_.size() < 2) throw ArgumentError("history has no per-step record");
    auto it = std::upper_bound(step_times_.begin(), step_times_.end(), t);
    std::size_t k = it == step_times_.begin() ? 0 : static_cast<std::size_t>(it - step_times_.begin()) - 1;
    return std::min(k, step_times_.size() - 2);
}

double RunHistory::a_at(double t, double r) const {
    const std::size_t k = level_index(t);
    const double th = std::clamp((t - step_times_[k]) / (step_times_[k + 1] - step_times_[k]), 0.0, 1.0);
    return (1.0 - th) * a_level(k, r) + th * a_level(k + 1, r);
}

double RunHistory::a_r_at(double t, double r) const {
    const std::size_t k = level_index(t);
    const double th = std::clamp((t - step_times_[k]) / (step_times_[k + 1] - step_times_[k]), 0.0, 1.0);
    return (1.0 - th) * a_r_level(k, r) + th * a_r_level(k + 1, r);
}

double RunHistory::a_t_at(double t, double r) const {
    const std::size_t k = level_index(t);
    return (a_level(k + 1, r) - a_level(k, r)) / (step_times_[k + 1] - step_times_[k]);
}

// run -------------------------------------------------------------------------

RunHistory run(const RadialProfile& f, const RadialProfile& g, const CoefficientModel& model,
               const RunOptions& opt) {
    if (!(f.grid() == g.grid())) throw ArgumentError("displacement and velocity grids differ");
    if (!(opt.T > 0.0) || !std::isfinite(opt.T)) throw ArgumentError("T must be positive");
    if (!(opt.cfl > 0.0 && opt.cfl < 1.0)) throw ArgumentError("cfl must lie in (0, 1)");
    if (!(opt.sample_dt > 0.0)) throw ArgumentError("sample_dt must be positive");
    if (!(opt.u_guard > 0.0)) throw ArgumentError("u_guard must be positive");
    const Grid grid = f.grid();
    if (opt.dense_stride == 0 || grid.n % opt.dense_stride != 0 || grid.n / opt.dense_stride < 3)
        throw ArgumentError("dense_stride must divide N and leave at least 3 cells");

    const double support = std::max(f.support_radius(), g.support_radius());
    const double reach = support + model.max_speed(opt.u_guard) * opt.T;
    if (reach > grid.r_max()) {
        std::ostringstream os;
        os << "domain too small: support " << support << " can travel to " << reach
           << " > r_max " << grid.r_max();
        throw DomainTooSmall(os.str());
    }

    RunHistory hist(grid, model, opt, f, g);

    std::vector<double> boundaries;
    for (std::size_t k = 1;; ++k) {
        const double tb = static_cast<double>(k) * opt.sample_dt;
        if (tb >= opt.T * (1.0 - 1e-12)) break;
        boundaries.push_back(tb);
    }
    boundaries.push_back(opt.T);

    WaveState cur = WaveState::from_data(f, g);
    GuardReading reading = check_level(cur, model, opt.u_guard);
    hist.record_level(0.0, reading.sup_u, cur);

    WaveState prev;
    bool have_prev = false;
    double dt_prev = 0.0;
    std::optional<ArchivedLevel> pending = ArchivedLevel{cur, {}, {}, 0.0, 0.0};

    auto take_step = [&](double dt, double t_new) {
        WaveState next = have_prev ? advance(prev, cur, model, dt_prev, dt) : taylor_start(cur, model, dt);
        next.t = t_new;
        reading = check_level(next, model, opt.u_guard);
        if (pending) {
            ArchivedLevel& lvl = *pending;
            lvl.v_after = next.v;
            lvl.dt_after = dt;
            if (!lvl.v_before.empty()) {
                const double kb = lvl.dt_before, ka = dt;
                auto& w = lvl.state.w;
                for (std::size_t i = 0; i < w.size(); ++i) {
                    const double v = lvl.state.v[i];
                    w[i] = (kb * kb * (lvl.v_after[i] - v) + ka * ka * (v - lvl.v_before[i])) /
                           (ka * kb * (ka + kb));
                }
            }
            hist.samples_.push_back(std::move(lvl));
            pending.reset();
        }
        prev = std::move(cur);
        cur = std::move(next);
        dt_prev = dt;
        have_prev = true;
        hist.record_level(cur.t, reading.sup_u, cur);
    };

    const double courant_cap = 0.5 * (1.0 + opt.cfl);
    double t_a = 0.0;
    for (double t_b : boundaries) {
        double t0 = t_a;
        auto plan = [&](double from) {
            const double span = t_b - from;
            const double dt_cfl = opt.cfl * grid.h / reading.max_a;
            const double m = std::max(1.0, std::ceil(span / dt_cfl - 1e-9));
            return std::pair{static_cast<std::size_t>(m), span / m};
        };
        auto [m, dt] = plan(t0);
        std::size_t j = 0;
        while (j < m) {
            if (dt * reading.max_a / grid.h > courant_cap) {
                t0 = cur.t;
                std::tie(m, dt) = plan(t0);
                j = 0;
            }
            ++j;
            const double t_new = j == m ? t_b : t0 + static_cast<double>(j) * dt;
            take_step(dt, t_new);
        }
        pending = ArchivedLevel{cur, prev.v, {}, dt_prev, 0.0};
        t_a = t_b;
    }
    const double dt_last = std::min(dt_prev, opt.cfl * grid.h / reading.max_a);
    take_step(dt_last, cur.t + dt_last);
    return hist;
}

RunHistory make_synthetic_history(Grid grid, const CoefficientModel& model,
                                  const RunOptions& options, std::vector<ArchivedLevel> levels) {
    if (levels.empty()) throw ArgumentError("no levels given");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i].state.grid == grid)) throw ArgumentError("level grid mismatch");
        if (i > 0 && !(levels[i].state.t > levels[i - 1].state.t))
            throw ArgumentError("level times must increase");
    }
    RunOptions opt = options;
    if (opt.dense_stride == 0) opt.dense_stride = 1;
    RunHistory h(grid, model, opt, RadialProfile::zero(grid), RadialProfile::zero(grid));
    h.samples_ = std::move(levels);
    return h;
}

// references and diagnostics ------------------------------------------------------

DalembertValue dalembert_reference(const RadialProfile& phi0, double t, double r) {
    if (!(t >= 0.0) || !(r >= 0.0)) throw ArgumentError("t and r must be nonnegative");
    const double R = phi0.support_radius();
    // psi(x) = x phi0(x) is odd; the solution is (psi(t+r) - psi(t-r)) / (2r).
    auto psi1 = [&](double x) {
        const double ax = std::abs(x);
        if (ax >= R) return 0.0;
        return phi0.eval(ax) + ax * phi0.deriv(ax);
    };
    auto psi2 = [&](double x) {
        const double ax = std::abs(x);
        if (ax >= R) return 0.0;
        const double s = x < 0.0 ? -1.0 : 1.0;
        return s * (2.0 * phi0.deriv(ax) + ax * phi0.deriv2(ax));
    };
    if (r < 1e-6 * phi0.grid().h) return {psi1(t), psi2(t)};
    auto psi = [&](double x) {
        const double ax = std::abs(x);
        if (ax >= R) return 0.0;
        return x * phi0.eval(ax);
    };
    return {(psi(t + r) - psi(t - r)) / (2.0 * r), (psi1(t + r) - psi1(t - r)) / (2.0 * r)};
}

double pde_residual(const RunHistory& history, std::span<const double> times, std::size_t stride) {
    if (stride == 0) throw ArgumentError("stride must be at least 1");
    const Grid& grid = history.grid();
    if (2 * stride >= grid.n) throw ArgumentError("stride too large for the grid");
    const double H = grid.h * static_cast<double>(stride);
    double worst = 0.0;
    for (double t : times) {
        const ArchivedLevel& lvl = history.nearest_sample(t);
        if (!lvl.has_neighbors()) throw ArgumentError("sample has no neighbouring solver levels");
        const auto& v = lvl.state.v;
        const double ka = lvl.dt_after, kb = lvl.dt_before;
        for (std::size_t i = stride; i + stride < v.size(); ++i) {
            const double vtt = 2.0 * ((lvl.v_after[i] - v[i]) / ka - (v[i] - lvl.v_before[i]) / kb) / (ka + kb);
            const double vrr = (v[i + stride] - 2.0 * v[i] + v[i - stride]) / (H * H);
            const double a = history.model()(lvl.state.u_at(i));
            worst = std::max(worst, std::abs(vtt - a * a * vrr));
        }
    }
    return worst;
}

ConvergenceResult convergence_order(const std::function<double(double)>& f,
                                    const std::function<double(double)>& g,
                                    const CoefficientModel& model, double r_max,
                                    std::span<const std::size_t> resolutions,
                                    const RunOptions& options) {
    if (resolutions.size() < 3) throw ArgumentError("need at least three resolutions");
    for (std::size_t i = 1; i < resolutions.size(); ++i)
        if (resolutions[i] != 2 * resolutions[i - 1])
            throw ArgumentError("resolutions must be nested (each twice the previous)");
    RunOptions opt = options;
    opt.sample_dt = opt.T;

    std::vector<std::vector<double>> finals;
    for (std::size_t n : resolutions) {
        const Grid grid = Grid::over(r_max, n);
        const auto fp = RadialProfile::sample(grid, f);
        const auto gp = RadialProfile::sample(grid, g);
        const RunHistory h = run(fp, gp, model, opt);
        finals.push_back(h.samples().back().state.v);
    }

    ConvergenceResult out;
    out.resolutions.assign(resolutions.begin(), resolutions.end());
    for (std::size_t k = 0; k + 1 < finals.size(); ++k) {
        const double h = r_max / static_cast<double>(resolutions[k]);
        double s = 0.0;
        for (std::size_t i = 0; i < finals[k].size(); ++i) {
            const double d = finals[k][i] - finals[k + 1][2 * i];
            s += d * d;
        }
        out.differences.push_back(std::sqrt(h * s));
    }
    const std::size_t m = out.differences.size();
    const double d1 = out.differences[m - 2], d2 = out.differences[m - 1];
    if (d1 == 0.0 && d2 == 0.0) {
        bool all_zero = std::all_of(out.differences.begin(), out.differences.end(),
                                    [](double d) { return d == 0.0; });
        if (all_zero) return out;
    }
    out.order = d2 == 0.0 ? std::numeric_limits<double>::infinity() : std::log2(d1 / d2);
    return out;
}

} // namespace qwave::evolve
