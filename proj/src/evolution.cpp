#include "lemult/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lemult/errors.hpp"

namespace lemult {

namespace {

double ipow(double x, int n)
{
    return std::pow(x, n);
}

void require_finite(const std::vector<double>& a, const char* what, double t)
{
    for (double x : a) {
        if (!std::isfinite(x)) {
            std::ostringstream msg;
            msg << "evolution: non-finite " << what << " at t = " << t;
            throw NumericalError(msg.str());
        }
    }
}

// centred d_* u at nodes, zero at the reflecting ends
double dstar(const std::vector<double>& u, std::size_t i, double h)
{
    if (i == 0 || i + 1 >= u.size()) {
        return 0.0;
    }
    return (u[i + 1] - u[i - 1]) / (2.0 * h);
}

}  // namespace

std::string to_string(DataKind k)
{
    return k == DataKind::outgoing ? "outgoing" : "time_symmetric";
}

// ---------------------------------------------------------------------------
// configuration

EvolutionConfig EvolutionConfig::defaults(const BackgroundParams& bg)
{
    EvolutionConfig c;
    c.bg = bg;
    c.mp = MultiplierParams::defaults(bg);
    return c;
}

std::size_t EvolutionConfig::points() const
{
    return static_cast<std::size_t>(std::llround((rstar_hi - rstar_lo) / spacing)) + 1;
}

void EvolutionConfig::validate() const
{
    std::vector<std::string> bad;
    if (!(spacing > 0.0)) {
        bad.push_back("spacing must be positive");
    }
    if (!(rstar_hi > rstar_lo)) {
        bad.push_back("rstar_lo must be below rstar_hi");
    }
    if (spacing > 0.0 && rstar_hi > rstar_lo) {
        const double cells = (rstar_hi - rstar_lo) / spacing;
        if (std::abs(cells - std::round(cells)) > 1e-9 * cells) {
            bad.push_back("spacing must divide the r_* range");
        }
    }
    if (!(dt > 0.0)) {
        bad.push_back("dt must be positive");
    } else if (dt > 0.5 * spacing * (1.0 + 1e-12)) {
        bad.push_back("CFL: dt must not exceed spacing / 2");
    }
    if (!(t_final >= 0.0)) {
        bad.push_back("t_final must be non-negative");
    }
    if (cadence < 1) {
        bad.push_back("cadence must be at least 1");
    }
    if (ells.empty()) {
        bad.push_back("ell list is empty");
    }
    for (int l : ells) {
        if (l < 0) {
            bad.push_back("ell must be >= 0");
            break;
        }
    }
    if (!(data.center_r > 1.0)) {
        bad.push_back("initial-data centre must lie outside the horizon (center_r > 1)");
    }
    if (!(data.width > 0.0)) {
        bad.push_back("initial-data width must be positive");
    }
    if (!std::isfinite(data.amplitude)) {
        bad.push_back("initial-data amplitude must be finite");
    }
    if (!bad.empty()) {
        std::string msg = "invalid evolution config:";
        for (const auto& b : bad) {
            msg += "\n  - " + b;
        }
        throw DomainError(msg);
    }
}

// ---------------------------------------------------------------------------
// grid and operator

std::shared_ptr<const EvolutionGrid> EvolutionGrid::make(const BackgroundParams& bg, double rstar_lo,
                                                         double rstar_hi, double spacing)
{
    const double cells = (rstar_hi - rstar_lo) / spacing;
    const auto n = static_cast<std::size_t>(std::llround(cells)) + 1;
    if (!(spacing > 0.0) || n < 3 || std::abs(cells - std::round(cells)) > 1e-9 * cells) {
        throw DomainError("EvolutionGrid: spacing must divide the r_* range into at least two cells");
    }
    const double half = 0.5 * (rstar_hi - rstar_lo) / static_cast<double>(n - 1);
    auto g = std::make_shared<EvolutionGrid>(EvolutionGrid{
        RadialGrid::uniform_in_tortoise(bg, rstar_lo, rstar_hi, n),
        RadialGrid::uniform_in_tortoise(bg, rstar_lo + half, rstar_hi - half, n - 1)});
    return g;
}

RadialOperator reduce_wave_operator(int ell, const EvolutionGrid& grid)
{
    const BackgroundParams& bg = grid.nodes.background();
    const int m = bg.d + 2;
    RadialOperator op;
    op.ell = ell;
    op.lambda = sphere_eigenvalue(ell, bg.d);
    op.spacing = grid.spacing();
    const std::size_t n = grid.nodes.size();
    op.mass.resize(n);
    op.potential.resize(n);
    op.face.resize(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = grid.nodes.areal(i);
        op.mass[i] = ipow(r, m);
        op.potential[i] = grid.nodes.cached_lapse(i) * op.lambda / (r * r);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        op.face[i] = ipow(grid.faces.areal(i), m);
    }
    return op;
}

void RadialOperator::apply(const std::vector<double>& u, std::vector<double>& out) const
{
    const std::size_t n = mass.size();
    out.assign(n, 0.0);
    const double h2 = spacing * spacing;
    for (std::size_t i = 0; i < n; ++i) {
        double flux = 0.0;
        if (i + 1 < n) {
            flux += face[i] * (u[i + 1] - u[i]);
        }
        if (i > 0) {
            flux -= face[i - 1] * (u[i] - u[i - 1]);
        }
        out[i] = flux / (h2 * mass[i]) - potential[i] * u[i];
    }
}

ModeState initial_state(const InitialData& data, int ell, std::shared_ptr<const EvolutionGrid> grid)
{
    const BackgroundParams& bg = grid->nodes.background();
    const double c = tortoise(radius_at(bg, data.center_r * bg.r_s), bg);
    ModeState s;
    s.ell = ell;
    s.grid = grid;
    const std::size_t n = grid->nodes.size();
    s.u.resize(n);
    s.v.resize(n);
    const double w2 = data.width * data.width;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = grid->nodes.point(i) - c;
        s.u[i] = data.amplitude * std::exp(-0.5 * z * z / w2);
        s.v[i] = data.kind == DataKind::outgoing ? z / w2 * s.u[i] : 0.0;
    }
    const double edge = std::max(std::abs(s.u.front()), std::abs(s.u.back()));
    if (edge > 1e-14 * std::max(1.0, std::abs(data.amplitude))) {
        throw DomainError("initial data is not contained in the grid");
    }
    return s;
}

// ---------------------------------------------------------------------------
// stepping

Stepper::Stepper(RadialOperator op, double dt) : op_(std::move(op)), dt_(dt)
{
    if (!(dt > 0.0) || dt > 0.5 * op_.spacing * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "CFL violation: dt = " << dt << " exceeds half the spacing " << op_.spacing;
        throw DomainError(msg.str());
    }
    const std::size_t n = op_.mass.size();
    const double k = dt * dt / (4.0 * op_.spacing * op_.spacing);
    diag_.resize(n);
    upper_.resize(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        if (i + 1 < n) {
            s += op_.face[i];
        }
        if (i > 0) {
            s += op_.face[i - 1];
        }
        diag_[i] = op_.mass[i] + k * s + 0.25 * dt * dt * op_.mass[i] * op_.potential[i];
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        upper_[i] = -k * op_.face[i];
    }
    c_.resize(n);
    inv_.resize(n);
    inv_[0] = 1.0 / diag_[0];
    c_[0] = upper_[0] * inv_[0];
    for (std::size_t i = 1; i < n; ++i) {
        inv_[i] = 1.0 / (diag_[i] - upper_[i - 1] * c_[i - 1]);
        c_[i] = i + 1 < n ? upper_[i] * inv_[i] : 0.0;
    }
}

ModeState Stepper::step(const ModeState& s) const
{
    const std::size_t n = op_.mass.size();
    if (s.u.size() != n || s.v.size() != n) {
        throw DomainError("step: state does not match the operator's grid");
    }
    const double k = dt_ * dt_ / (4.0 * op_.spacing * op_.spacing);
    // rhs = (M - dt^2/4 S) u + dt M v
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        double flux = 0.0;
        if (i + 1 < n) {
            flux += op_.face[i] * (s.u[i + 1] - s.u[i]);
        }
        if (i > 0) {
            flux -= op_.face[i - 1] * (s.u[i] - s.u[i - 1]);
        }
        x[i] = op_.mass[i] * s.u[i] + k * flux - 0.25 * dt_ * dt_ * op_.mass[i] * op_.potential[i] * s.u[i] +
               dt_ * op_.mass[i] * s.v[i];
    }
    x[0] *= inv_[0];
    for (std::size_t i = 1; i < n; ++i) {
        x[i] = (x[i] - upper_[i - 1] * x[i - 1]) * inv_[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] -= c_[i] * x[i + 1];
    }
    ModeState out;
    out.ell = s.ell;
    out.t = s.t + dt_;
    out.grid = s.grid;
    out.v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.v[i] = 2.0 * (x[i] - s.u[i]) / dt_ - s.v[i];
    }
    out.u = std::move(x);
    require_finite(out.u, "u", out.t);
    require_finite(out.v, "v", out.t);
    return out;
}

ModeState step(const ModeState& s, double dt)
{
    return Stepper(reduce_wave_operator(s.ell, *s.grid), dt).step(s);
}

double energy_of_mode(const ModeState& s, const RadialOperator& op)
{
    const double h = op.spacing;
    double e = 0.0;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        e += h * op.mass[i] * (s.v[i] * s.v[i] + op.potential[i] * s.u[i] * s.u[i]);
    }
    for (std::size_t i = 0; i + 1 < s.u.size(); ++i) {
        const double du = s.u[i + 1] - s.u[i];
        e += op.face[i] * du * du / h;
    }
    return e;
}

double energy_of_mode(const ModeState& s)
{
    return energy_of_mode(s, reduce_wave_operator(s.ell, *s.grid));
}

// ---------------------------------------------------------------------------
// LE norm

LeWeights le_weights(int ell, const EvolutionGrid& grid)
{
    const BackgroundParams& bg = grid.nodes.background();
    const int m = bg.d + 2;
    const double lambda = sphere_eigenvalue(ell, bg.d);
    LeWeights w;
    const std::size_t n = grid.nodes.size();
    w.ang.resize(n);
    w.zero.resize(n);
    w.grad.resize(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = grid.nodes.areal(i);
        const double ly = grid.nodes.log_y(i);
        const double rm = ipow(r, m);
        const double q = (r - bg.r_ps) / r;
        const double c_w = q * q / r;
        w.ang[i] = grid.nodes.cached_lapse(i) * c_w * lambda / (r * r) * rm;
        w.zero[i] = lapse_times_c0(r, ly, bg) * rm;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double r = grid.faces.areal(i);
        w.grad[i] = c_r_from_log_y(r, grid.faces.log_y(i), bg) * ipow(r, m);
    }
    return w;
}

double le_density(const ModeState& s, const LeWeights& w)
{
    const double h = s.grid->spacing();
    double sum = 0.0;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        sum += h * (w.ang[i] + w.zero[i]) * s.u[i] * s.u[i];
    }
    for (std::size_t i = 0; i + 1 < s.u.size(); ++i) {
        const double du = s.u[i + 1] - s.u[i];
        sum += w.grad[i] * du * du / h;
    }
    return sum;
}

double le_increment(const ModeState& a, const ModeState& b, const LeWeights& w)
{
    return 0.5 * (b.t - a.t) * (le_density(a, w) + le_density(b, w));
}

// ---------------------------------------------------------------------------
// divergence identity

BaseIdentity::BaseIdentity(const MultiplierProfile& prof, int ell, std::shared_ptr<const EvolutionGrid> grid)
    : grid_(std::move(grid))
{
    const BackgroundParams& bg = prof.background();
    const MultiplierParams& mp = prof.params();
    const int d = bg.d;
    m_ = d + 2;
    const double lambda = sphere_eigenvalue(ell, d);
    const RadialGrid& nodes = grid_->nodes;
    const RadialGrid& faces = grid_->faces;
    const std::size_t n = nodes.size();
    auto usable = [](const Radius& x) {
        if (!(x.gap > 1e-300)) {
            throw DomainError("divergence identity: the grid reaches r - r_s < 1e-300; raise rstar_lo");
        }
    };
    b_flux_.resize(n);
    b_mix_.resize(n);
    k_ang_.resize(n);
    k_zero_.resize(n);
    k_grad_.resize(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const Radius x = nodes.radius(i);
        usable(x);
        const double A = nodes.cached_lapse(i);
        const double rm = ipow(x.r, m_);
        const double f = prof.f(x);
        const double fp = prof.f_prime(x);
        b_flux_[i] = f * rm;
        b_mix_[i] = 0.5 * (A * fp + m_ * f * A / x.r) * rm;
        k_ang_[i] = A * (1.0 - ipow(bg.r_ps / x.r, d + 1)) * f * lambda / ipow(x.r, 3) * rm;
        k_zero_[i] = A * prof.l_f_closed(x, Side::above) * rm;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const Radius x = faces.radius(i);
        usable(x);
        k_grad_[i] = faces.cached_lapse(i) * prof.f_prime(x) * ipow(x.r, m_);
    }

    k_zero_left_ = k_zero_;
    const double lo = nodes.point(0);
    const double h = grid_->spacing();
    for (const Radius& b : {mp.r_break_low, radius_at(bg, bg.r_ps), mp.r_break_high}) {
        const double s = tortoise(b, bg);
        const double pos = (s - lo) / h;
        const double A = lapse(b, bg);
        const double rm = ipow(b.r, m_);
        const double below = A * prof.l_f_closed(b, Side::below) * rm;
        const double above = A * prof.l_f_closed(b, Side::above) * rm;
        const double node = std::round(pos);
        if (std::abs(pos - node) < 1e-9 && node >= 0.0 && node <= static_cast<double>(n - 1)) {
            // breakpoint on a node: each adjacent cell takes its own side
            const auto i = static_cast<std::size_t>(node);
            k_zero_left_[i] = below;
            k_zero_[i] = above;
            continue;
        }
        const double cell = std::floor(pos);
        if (cell < 0.0 || cell > static_cast<double>(n - 2)) {
            continue;
        }
        splits_.push_back({static_cast<std::size_t>(cell), s, below, above});
    }
    s_jump_ = tortoise(mp.r_break_low, bg);
    const double Ab = lapse(mp.r_break_low, bg);
    jump_coef_ = 0.25 * ipow(mp.r_break_low.r, m_) * Ab * Ab * prof.f_second_jump();
}

double BaseIdentity::interp(const std::vector<double>& u, double s) const
{
    const double lo = grid_->nodes.point(0);
    const double h = grid_->spacing();
    const double pos = (s - lo) / h;
    if (pos <= 0.0) {
        return u.front();
    }
    if (pos >= static_cast<double>(u.size() - 1)) {
        return u.back();
    }
    const auto i = static_cast<std::size_t>(pos);
    const double t = pos - static_cast<double>(i);
    return (1.0 - t) * u[i] + t * u[i + 1];
}

double BaseIdentity::boundary(const ModeState& s) const
{
    const double h = grid_->spacing();
    double sum = 0.0;
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        sum -= h * (b_flux_[i] * s.v[i] * dstar(s.u, i, h) + b_mix_[i] * s.u[i] * s.v[i]);
    }
    return sum;
}

double BaseIdentity::bulk(const ModeState& s) const
{
    const double h = grid_->spacing();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < s.u.size(); ++i) {
        const double du = s.u[i + 1] - s.u[i];
        sum += k_grad_[i] * du * du / h;
    }
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        sum += h * k_ang_[i] * s.u[i] * s.u[i];
    }
    for (std::size_t i = 0; i + 1 < s.u.size(); ++i) {
        sum += 0.5 * h * (k_zero_[i] * s.u[i] * s.u[i] + k_zero_left_[i + 1] * s.u[i + 1] * s.u[i + 1]);
    }
    // l(f) jumps: redo the trapezoid on the cells that contain one
    for (const Split& sp : splits_) {
        const std::size_t i = sp.cell;
        const double xi = grid_->nodes.point(i);
        const double qi = k_zero_[i] * s.u[i] * s.u[i];
        const double qj = k_zero_left_[i + 1] * s.u[i + 1] * s.u[i + 1];
        const double us = interp(s.u, sp.s);
        sum -= 0.5 * h * (qi + qj);
        sum += 0.5 * (sp.s - xi) * (qi + sp.lo * us * us) + 0.5 * (xi + h - sp.s) * (sp.hi * us * us + qj);
    }
    return sum;
}

double BaseIdentity::jump(const ModeState& s) const
{
    const double u = interp(s.u, s_jump_);
    return jump_coef_ * u * u;
}

// ---------------------------------------------------------------------------
// runs

double EnergyLeSeries::le_at(double t) const
{
    if (times.empty()) {
        return 0.0;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (std::abs(times[i] - t) < std::abs(times[best] - t)) {
            best = i;
        }
    }
    return le_accum[best];
}

double EnergyLeSeries::bound_ratio() const
{
    if (e0 == 0.0 || le_accum.empty()) {
        return 0.0;
    }
    return (sup_energy + le_accum.back()) / e0;
}

namespace {

// fraction of the grid at each end watched for contamination
constexpr double kEdgeFraction = 0.02;

double edge_amplitude(const ModeState& s)
{
    const std::size_t n = s.u.size();
    const auto k = std::max<std::size_t>(2, static_cast<std::size_t>(kEdgeFraction * static_cast<double>(n)));
    double m = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        m = std::max({m, std::abs(s.u[i]), std::abs(s.u[n - 1 - i])});
    }
    return m;
}

}  // namespace

EnergyLeSeries evolve_mode(const EvolutionConfig& cfg, int ell)
{
    cfg.validate();
    auto grid = EvolutionGrid::make(cfg.bg, cfg.rstar_lo, cfg.rstar_hi, cfg.spacing);
    const auto steps = static_cast<long>(std::ceil(cfg.t_final / cfg.dt - 1e-9));
    const double dt = steps > 0 ? cfg.t_final / static_cast<double>(steps) : cfg.dt;
    const Stepper stepper(reduce_wave_operator(ell, *grid), dt);
    const LeWeights w = le_weights(ell, *grid);

    ModeState s = initial_state(cfg.data, ell, grid);
    std::unique_ptr<BaseIdentity> ident;
    if (cfg.track_identity) {
        ident = std::make_unique<BaseIdentity>(MultiplierProfile(cfg.bg, cfg.mp), ell, grid);
    }

    EnergyLeSeries out;
    out.ell = ell;
    out.kind = cfg.data.kind;
    out.e0 = energy_of_mode(s, stepper.op());
    out.sup_energy = out.e0;
    const double u_scale = std::max(1e-300, *std::max_element(s.u.begin(), s.u.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    }));

    double le = 0.0;
    double le_prev = le_density(s, w);
    double b0 = 0.0;
    double bulk_acc = 0.0;
    double jump_acc = 0.0;
    double bulk_prev = 0.0;
    double jump_prev = 0.0;
    if (ident) {
        b0 = ident->boundary(s);
        bulk_prev = ident->bulk(s);
        jump_prev = ident->jump(s);
    }
    const double e_norm = out.e0 > 0.0 ? out.e0 : 1.0;

    auto record = [&](const ModeState& st, double residual) {
        const double e = energy_of_mode(st, stepper.op());
        out.times.push_back(st.t);
        out.energy.push_back(e);
        out.le_accum.push_back(le);
        if (ident) {
            out.base_residual.push_back(residual);
        }
        out.sup_energy = std::max(out.sup_energy, e);
        if (out.e0 > 0.0) {
            out.max_drift = std::max(out.max_drift, std::abs(e - out.e0) / out.e0);
        }
        if (!out.contaminated && out.e0 > 0.0 && edge_amplitude(st) > 1e-8 * u_scale) {
            out.contaminated = true;
            out.contamination_time = st.t;
            std::ostringstream msg;
            msg << "l = " << ell << ": signal reached a grid end at t = " << st.t
                << "; later samples are not trustworthy";
            out.warnings.push_back(msg.str());
        }
    };
    record(s, 0.0);

    for (long k = 1; k <= steps; ++k) {
        ModeState next = stepper.step(s);
        const double le_next = le_density(next, w);
        le += 0.5 * dt * (le_prev + le_next);
        le_prev = le_next;
        double residual = 0.0;
        if (ident) {
            const double bulk_next = ident->bulk(next);
            const double jump_next = ident->jump(next);
            bulk_acc += 0.5 * dt * (bulk_prev + bulk_next);
            jump_acc += 0.5 * dt * (jump_prev + jump_next);
            bulk_prev = bulk_next;
            jump_prev = jump_next;
            const double rhs = bulk_acc + (cfg.drop_jump_term ? 0.0 : jump_acc);
            residual = (ident->boundary(next) - b0 - rhs) / e_norm;
        }
        s = std::move(next);
        s.t = static_cast<double>(k) * dt;  // no drift from repeated += dt
        if (k % cfg.cadence == 0 || k == steps) {
            record(s, residual);
        }
    }
    return out;
}

std::vector<EnergyLeSeries> evolve(const EvolutionConfig& cfg)
{
    cfg.validate();
    std::vector<EnergyLeSeries> out;
    for (int ell : cfg.ells) {
        out.push_back(evolve_mode(cfg, ell));
    }
    return out;
}

double base_identity_residual(const std::vector<ModeState>& history, const MultiplierProfile& prof,
                              bool drop_jump_term)
{
    if (history.size() < 2) {
        throw DomainError("base_identity_residual: need at least two stored states");
    }
    const auto& grid = history.front().grid;
    const double gap = history[1].t - history[0].t;
    if (!(gap > 0.0)) {
        throw DomainError("base_identity_residual: history times must increase");
    }
    for (std::size_t k = 1; k < history.size(); ++k) {
        if (history[k].grid != grid || history[k].ell != history[0].ell) {
            throw DomainError("base_identity_residual: history mixes grids or modes");
        }
        if (std::abs(history[k].t - history[k - 1].t - gap) > 1e-9 * gap) {
            throw DomainError("base_identity_residual: history cadence is not uniform");
        }
    }
    if (gap > grid->spacing() * (1.0 + 1e-12)) {
        throw DomainError("base_identity_residual: history cadence coarser than the grid spacing");
    }
    const BaseIdentity id(prof, history[0].ell, grid);
    double bulk = 0.0;
    for (std::size_t k = 1; k < history.size(); ++k) {
        double a = id.bulk(history[k - 1]);
        double b = id.bulk(history[k]);
        if (!drop_jump_term) {
            a += id.jump(history[k - 1]);
            b += id.jump(history[k]);
        }
        bulk += 0.5 * gap * (a + b);
    }
    const double e0 = energy_of_mode(history.front());
    const double res = id.boundary(history.back()) - id.boundary(history.front()) - bulk;
    return e0 > 0.0 ? res / e0 : res;
}

double observed_order(double coarse, double mid, double fine)
{
    const double a = std::abs(coarse - mid);
    const double b = std::abs(mid - fine);
    if (!(a > 0.0) || !(b > 0.0)) {
        throw NumericalError("observed_order: differences vanish; order undefined");
    }
    return std::log2(a / b);
}

}  // namespace lemult
