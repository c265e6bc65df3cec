"""Triad series and verification checks along trajectories.

Every inequality proved for the flow is operationalized as a
:class:`RatioReport`: the empirical supremum of LHS/RHS over the usable
samples of a trajectory, compared against a fixed per-check threshold
(default 10 for the universal-constant bounds).  Samples whose
right-hand side falls below 1e-14 are excluded so equilibria do not
produce 0/0 ratios.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamples, RegimeNeverEntered, ZeroModeNonzero
from .evolution import Trajectory  # noqa: F401  (re-exported for callers)
from .field import dissipation, normal_velocity, solve_exterior_fields
from .geometry import energy, sup_height, sup_slope, to_arclength
from .spectral import SpectralProfile, derivative, seminorm

RHS_FLOOR = 1e-14
DEFAULT_THRESHOLD = 10.0
LYAPUNOV_EPSILON = 1e-3
LYAPUNOV_STEP_TOL = 1e-3
LATE_TIME_FACTOR = 5.0

#: columns of the triad CSV, in order
TRIAD_FIELDS = (
    "t",
    "E",
    "D",
    "H",
    "Hhalf",
    "sup_slope",
    "sup_h",
    "E2D",
    "intVs2",
    "curv_L2",
)


@dataclass(frozen=True)
class TriadSample:
    """One time-stamped record of the triad and auxiliary norms.

    The ten core fields are what the CSV round-trips; the trailing
    profile-level norms are populated by :func:`triad_series` and are
    needed only by the lemma checks that go beyond the CSV columns
    (they stay ``None`` when a sample is parsed back from disk).
    """

    t: float
    E: float
    D: float
    H: float
    Hhalf: float
    sup_slope: float
    sup_h: float
    E2D: float
    intVs2: float
    curv_L2: float
    kappa_half_sq: float = None
    kappa_neg1_sq: float = None
    hx_l2: float = None
    hxx_l2: float = None
    h_l3: float = None


@dataclass(frozen=True)
class RatioReport:
    """Outcome of one inequality check over a trajectory."""

    name: str
    empirical_sup: float
    threshold: float
    passed: bool
    num_samples: int

    @classmethod
    def from_ratios(cls, name, ratios, threshold):
        ratios = [r for r in ratios if r is not None]
        sup = max(ratios) if ratios else 0.0
        return cls(name, float(sup), float(threshold), bool(sup <= threshold), len(ratios))


def _ratio(lhs, rhs):
    if rhs < RHS_FLOOR:
        return None
    return lhs / rhs


def _drop_mean(profile):
    coeffs = profile.coeffs.copy()
    coeffs[0] = 0.0
    return SpectralProfile.from_coeffs(profile.grid, coeffs)


def compute_H(state):
    """Squared gradient-flow distance to the flat interface.

    H is the Dirichlet energy of the potential of the signed indicator
    chi of the region between the graph and the flat line.  It is
    evaluated per Fourier mode in x with the one-dimensional Green's
    function exp(-|k||z-z'|)/(2|k|); chi is piecewise constant in z on the
    panels cut by the node heights, so the z-integrals are carried out in
    closed form panel by panel.  The zero mode contributes
    integral |Phi'|^2 dz with Phi'(z) = -integral_{-inf}^z chi_0.
    """
    h = state.h
    if not h.is_mean_zero(rtol=1e-10):
        raise ZeroModeNonzero("H is finite only for mean-zero height profiles")
    samples = h.samples
    n = h.grid.num_points
    if np.all(samples == 0.0):
        return 0.0

    lo = np.minimum(samples, 0.0)
    hi = np.maximum(samples, 0.0)
    breaks = np.unique(np.concatenate(([0.0], samples)))
    widths = np.diff(breaks)
    keep = widths > 0.0
    z_lo = breaks[:-1][keep]
    widths = widths[keep]
    centers = z_lo + 0.5 * widths

    # chi = -sign(h) on the interval between 0 and h(x), sampled per column
    active = (centers[:, None] > lo[None, :]) & (centers[:, None] < hi[None, :])
    strength = np.where(active, -np.sign(samples)[None, :], 0.0)
    chat = np.fft.rfft(strength, axis=1) / n  # (panels, n//2+1)

    k_pos = 2.0 * np.pi * np.arange(1, n // 2 + 1) / h.grid.length
    decay = np.exp(-np.outer(widths, k_pos))  # exp(-k * panel width)

    # same-panel double integral of exp(-k|z-z'|): 2*(w/k - (1-e^{-kw})/k^2)
    same = 2.0 * (widths[:, None] / k_pos[None, :] - (1.0 - decay) / k_pos[None, :] ** 2)
    modal = np.sum(np.abs(chat[:, 1:]) ** 2 * same, axis=0)

    # cross panels via a cumulative sweep: panels are sorted, so the gap
    # factors accumulate as products of per-panel decays
    carry = np.zeros(n // 2, dtype=complex)
    cross = np.zeros(n // 2)
    for p in range(len(widths)):
        c_p = chat[p, 1:]
        one_minus = 1.0 - decay[p]
        cross += 2.0 * (c_p * carry).real * one_minus / k_pos**2
        carry = decay[p] * carry + np.conj(c_p) * one_minus

    per_mode = (modal + cross) / (2.0 * k_pos)
    pair_weight = np.full(n // 2, 2.0)
    pair_weight[-1] = 1.0  # the unpaired -N/2 mode counts once
    total = float(np.sum(pair_weight * per_mode))

    # zero mode: Phi' is piecewise linear with slope -chi_0 per panel
    chi0 = strength.mean(axis=1)
    phi_prime = np.concatenate(([0.0], np.cumsum(-chi0 * widths)))
    a = phi_prime[:-1]
    b = phi_prime[1:]
    total += float(np.sum(widths * (a * a + a * b + b * b) / 3.0))

    # the quadratic form is nonnegative; round-off can leave a tiny
    # negative total once the profile has decayed to machine level
    return max(h.grid.length * total, 0.0)


def triad_series(traj, strip):
    """Compute one :class:`TriadSample` per snapshot of a trajectory."""
    out = []
    for t, state in zip(traj.times, traj.states):
        e = energy(state)
        fields = solve_exterior_fields(state, strip)
        d = dissipation(fields, state)
        v = normal_velocity(fields, state)
        h_dist = compute_H(state)
        hhalf = seminorm(state.h, -0.5) ** 2

        v_arc = _drop_mean(to_arclength(state, v))
        int_vs2 = seminorm(v_arc, 1.0) ** 2
        curv_l2 = float(
            state.grid.spacing
            * np.sum(state.curvature.samples**2 * state.line_element)
        )
        kappa_arc = _drop_mean(to_arclength(state, state.curvature))
        sample = TriadSample(
            t=t,
            E=e,
            D=d,
            H=h_dist,
            Hhalf=hhalf,
            sup_slope=sup_slope(state),
            sup_h=sup_height(state),
            E2D=e * e * d,
            intVs2=int_vs2,
            curv_L2=curv_l2,
            kappa_half_sq=seminorm(kappa_arc, 0.5) ** 2,
            kappa_neg1_sq=seminorm(kappa_arc, -1.0) ** 2,
            hx_l2=state.slope.l2_norm(),
            hxx_l2=derivative(state.h, 2).l2_norm(),
            h_l3=float(
                (state.grid.spacing * np.sum(np.abs(state.h.samples) ** 3)) ** (1.0 / 3.0)
            ),
        )
        out.append(sample)
    return out


def _check_usable(samples, minimum):
    if len(samples) < minimum:
        raise InsufficientSamples(
            f"need at least {minimum} samples, got {len(samples)}"
        )


def check_algebraic(samples, thresholds=None):
    """Lemma-level algebraic inequality checks.

    Emits one report per inequality; the bracket between the energy and
    the squared slope norm is exact algebra so its two sides carry a
    threshold of one (up to round-off) rather than the universal-constant
    default.
    """
    _check_usable(samples, 3)
    thresholds = thresholds or {}

    def thr(name, default=DEFAULT_THRESHOLD):
        return thresholds.get(name, default)

    has_aux = all(s.kappa_half_sq is not None for s in samples)
    reports = []

    def ratio_report(name, pairs, default=DEFAULT_THRESHOLD):
        reports.append(
            RatioReport.from_ratios(
                name, [_ratio(l, r) for l, r in pairs], thr(name, default)
            )
        )

    if has_aux:
        ratio_report("kappa_half_d", [(s.kappa_half_sq, s.D) for s in samples])
        ratio_report("kappa_neg1_e", [(s.kappa_neg1_sq, s.E) for s in samples])
        ratio_report(
            "slope_energy_hi",
            [(s.hx_l2**2, (1.0 + np.sqrt(2.0)) * s.E) for s in samples],
            default=1.0 + 1e-9,
        )
        ratio_report(
            "slope_energy_lo",
            [(2.0 * s.E, s.hx_l2**2) for s in samples],
            default=1.0 + 1e-9,
        )
        ratio_report(
            "height_l3",
            [
                (
                    s.h_l3,
                    s.Hhalf ** (1.0 / 3.0) * s.hx_l2 ** (1.0 / 6.0) * s.hxx_l2 ** (1.0 / 6.0),
                )
                for s in samples
            ],
        )
    ratio_report(
        "curvature_l2",
        [(s.curv_L2, s.E ** (1.0 / 3.0) * s.D ** (2.0 / 3.0)) for s in samples],
    )
    ratio_report("slope_e2d", [(s.sup_slope, s.E2D ** (1.0 / 6.0)) for s in samples])
    ratio_report("hhalf_h", [(s.Hhalf, s.H) for s in samples])
    ratio_report("energy_hd", [(s.E, np.sqrt(s.H * s.D)) for s in samples])
    ratio_report(
        "height_interp",
        [(s.sup_h, (s.Hhalf * s.E**2) ** (1.0 / 6.0)) for s in samples],
    )
    return reports


def _uniform_cadence(samples):
    times = np.array([s.t for s in samples])
    gaps = np.diff(times)
    if len(gaps) < 2:
        raise InsufficientSamples("differential checks need >= 3 samples")
    if np.ptp(gaps) > 1e-6 * gaps.mean():
        raise InsufficientSamples("differential checks need a uniform cadence")
    return gaps.mean()


def check_differential(samples, thresholds=None):
    """Centered-difference verification of the differential relations.

    ``energy_dissipation`` measures |dE/dt + D|/D; ``dissipation_rate``
    bounds (dD/dt + int V_s^2)/(D^{5/2} + E D^3) from above and
    ``distance_rate`` does the same for dH/dt against
    H^{1/2} E^{1/6} D^{7/12}.  Only interior samples enter, so there is
    no one-sided bias at the trajectory ends.
    """
    _check_usable(samples, 3)
    dt = _uniform_cadence(samples)
    thresholds = thresholds or {}

    ee, dd, dh = [], [], []
    for i in range(1, len(samples) - 1):
        mid = samples[i]
        de = (samples[i + 1].E - samples[i - 1].E) / (2.0 * dt)
        ddis = (samples[i + 1].D - samples[i - 1].D) / (2.0 * dt)
        dhd = (samples[i + 1].H - samples[i - 1].H) / (2.0 * dt)
        ee.append(_ratio(abs(de + mid.D), mid.D))
        dd.append(_ratio(ddis + mid.intVs2, mid.D**2.5 + mid.E * mid.D**3))
        dh.append(
            _ratio(dhd, np.sqrt(mid.H) * mid.E ** (1.0 / 6.0) * mid.D ** (7.0 / 12.0))
        )
    return [
        RatioReport.from_ratios(
            "energy_dissipation", ee, thresholds.get("energy_dissipation", 2e-2)
        ),
        RatioReport.from_ratios(
            "dissipation_rate", dd, thresholds.get("dissipation_rate", DEFAULT_THRESHOLD)
        ),
        RatioReport.from_ratios(
            "distance_rate", dh, thresholds.get("distance_rate", DEFAULT_THRESHOLD)
        ),
    ]


def check_lyapunov(samples, epsilon=LYAPUNOV_EPSILON, step_tol=LYAPUNOV_STEP_TOL):
    """E^2 D must be nonincreasing once it has entered the smallness regime.

    Reports the largest relative step increase after the first sample with
    E^2 D <= epsilon; a flat state (identically zero) is vacuously
    nonincreasing.
    """
    _check_usable(samples, 2)
    values = np.array([s.E2D for s in samples])
    inside = np.nonzero(values <= epsilon)[0]
    if len(inside) == 0:
        raise RegimeNeverEntered(
            f"E^2 D never dropped below epsilon = {epsilon:.3e}"
        )
    start = inside[0]
    worst = 0.0
    count = 0
    for i in range(start, len(values) - 1):
        scale = max(values[i], RHS_FLOOR)
        worst = max(worst, (values[i + 1] - values[i]) / scale)
        count += 1
    return RatioReport("lyapunov_e2d", float(worst), float(step_tol), worst <= step_tol, count)


def check_decay_rates(samples, h0_norm, thresholds=None):
    """Theorem-rate supremum checks against the initial distance H0.

    All-samples sups of t*E/H0 and H/H0; on the late-time window
    t >= 5*H0^{3/4} also t^2*D/H0 plus the slope and height rates; and the
    height interpolation sup|h|/(H E^2)^{1/6}.
    """
    if h0_norm <= 0:
        raise ValueError("H0 must be positive")
    _check_usable(samples, 1)
    thresholds = thresholds or {}

    def thr(name):
        return thresholds.get(name, DEFAULT_THRESHOLD)

    t_late = LATE_TIME_FACTOR * h0_norm ** 0.75
    late = [s for s in samples if s.t >= t_late]
    reports = [
        RatioReport.from_ratios(
            "rate_te", [_ratio(s.t * s.E, h0_norm) for s in samples], thr("rate_te")
        ),
        RatioReport.from_ratios(
            "rate_h", [_ratio(s.H, h0_norm) for s in samples], thr("rate_h")
        ),
        RatioReport.from_ratios(
            "rate_t2d", [_ratio(s.t**2 * s.D, h0_norm) for s in late], thr("rate_t2d")
        ),
        RatioReport.from_ratios(
            "rate_slope",
            [_ratio(s.t ** (2.0 / 3.0) * s.sup_slope, np.sqrt(h0_norm)) for s in late],
            thr("rate_slope"),
        ),
        RatioReport.from_ratios(
            "rate_height",
            [_ratio(s.t ** (1.0 / 3.0) * s.sup_h, np.sqrt(h0_norm)) for s in late],
            thr("rate_height"),
        ),
        RatioReport.from_ratios(
            "height_he2",
            [_ratio(s.sup_h, (s.H * s.E**2) ** (1.0 / 6.0)) for s in samples],
            thr("height_he2"),
        ),
    ]
    return reports


def _lowpass(values, grid, keep_modes):
    coeffs = np.fft.fft(values) / grid.num_points
    m = np.fft.fftfreq(grid.num_points) * grid.num_points
    coeffs[np.abs(m) > keep_modes] = 0.0
    return np.fft.ifft(coeffs * grid.num_points).real


def check_curvature_evolution(traj, strip, threshold=0.05, keep_fraction=0.125):
    """Material-derivative identity for the curvature along the flow.

    Along particle paths the curvature obeys Dkappa/dt = -V_ss - kappa^2 V.
    The left side is reconstructed from centered time differences of kappa
    at fixed x plus the convective correction V h_x kappa_x / sqrt(1+h_x^2)
    (grid points travel vertically, particles travel along the normal).
    Both sides are low-pass filtered to the resolved band before the
    relative L2 defect is taken.
    """
    if len(traj) < 3:
        raise InsufficientSamples("curvature evolution needs >= 3 snapshots")
    times = np.asarray(traj.times)
    gaps = np.diff(times)
    if np.ptp(gaps) > 1e-6 * gaps.mean():
        raise InsufficientSamples("curvature evolution needs a uniform cadence")
    dt = gaps.mean()
    grid = traj.states[0].grid
    keep = max(2, int(keep_fraction * grid.num_points))

    defects = []
    for i in range(1, len(traj) - 1):
        state = traj.states[i]
        fields = solve_exterior_fields(state, strip)
        v = normal_velocity(fields, state).samples
        kappa = state.curvature
        kappa_t = (
            traj.states[i + 1].curvature.samples - traj.states[i - 1].curvature.samples
        ) / (2.0 * dt)
        convect = (
            v * state.slope.samples * derivative(kappa, 1).samples / state.line_element
        )
        lhs = kappa_t + convect

        v_s = derivative(SpectralProfile.from_samples(grid, v), 1).samples / state.line_element
        v_ss = derivative(SpectralProfile.from_samples(grid, v_s), 1).samples / state.line_element
        rhs = -v_ss - kappa.samples**2 * v

        lhs_f = _lowpass(lhs, grid, keep)
        rhs_f = _lowpass(rhs, grid, keep)
        scale = np.linalg.norm(rhs_f)
        if scale < RHS_FLOOR:
            continue
        defects.append(np.linalg.norm(lhs_f - rhs_f) / scale)

    sup = max(defects) if defects else 0.0
    return RatioReport(
        "curvature_evolution", float(sup), float(threshold), sup <= threshold, len(defects)
    )
