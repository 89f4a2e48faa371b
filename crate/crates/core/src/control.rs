//! Continuum control layer: the two skew-symmetric generators of the global
//! and local flows, their Lie closure, closed-form arc propagators for the
//! reduced switching variables, switching-time formulas, bang-bang extremal
//! simulation, and the compression/endpoint reports.
//!
//! Conventions: `s = sin(gamma)`, `c = cos(gamma)`. The switching function
//! is `phi1 = <p, (X - Y) psi>`; its sign selects the active generator
//! (positive means X). Along an extremal both the state and the costate are
//! advanced by the same closed-form rotation, since the adjoint equation for
//! a skew generator is `dp/dt = A p`.

use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{dot, norm, Mat3, Vec3};
use crate::math;
use crate::reduced::ReducedOperator;

const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// Skew-symmetric 3x3 generator of a one-parameter rotation flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Generator {
    pub matrix: Mat3,
}

impl Generator {
    pub fn new(matrix: Mat3) -> Self {
        Generator { matrix }
    }

    /// Largest entry of `A + A^T`; zero for an exactly skew matrix.
    pub fn skewness_defect(&self) -> f64 {
        self.matrix.add(&self.matrix.transpose()).max_abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ControlError {
    GammaOutOfRange { gamma: f64 },
    /// Reduced switching data `(a, b) = (0, 0)` carries no sign information.
    DegenerateSwitchData,
    ZeroCostate,
}

impl fmt::Display for ControlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ControlError::GammaOutOfRange { gamma } => {
                write!(f, "gamma={gamma} outside the open interval (0, pi/2)")
            }
            ControlError::DegenerateSwitchData => {
                write!(f, "degenerate reduced switching data (a, b) = (0, 0)")
            }
            ControlError::ZeroCostate => write!(f, "costate must be nonzero"),
        }
    }
}

impl core::error::Error for ControlError {}

fn check_gamma(gamma: f64) -> Result<(), ControlError> {
    if gamma > 0.0 && gamma < core::f64::consts::FRAC_PI_2 {
        Ok(())
    } else {
        Err(ControlError::GammaOutOfRange { gamma })
    }
}

/// The generators of the global (X) and local (Y) flows:
/// X has entries `(1,2) = s^2`, `(1,3) = s c` skew-completed; Y is the fixed
/// unit rotation in the `(t, ntt)` plane.
pub fn generators(gamma: f64) -> Result<(Generator, Generator), ControlError> {
    check_gamma(gamma)?;
    let s = math::sin(gamma);
    let c = math::cos(gamma);
    let x = Mat3([[0.0, s * s, s * c], [-s * s, 0.0, 0.0], [-s * c, 0.0, 0.0]]);
    let y = Mat3([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
    Ok((Generator::new(x), Generator::new(y)))
}

/// Commutator `[A, B] = AB - BA`.
pub fn bracket(a: &Generator, b: &Generator) -> Mat3 {
    a.matrix.mul(&b.matrix).sub(&b.matrix.mul(&a.matrix))
}

/// The closed commutator family: `F1 = X - Y`, `F2 = [X, Y]`,
/// `F3 = [Y, [X, Y]]`.
pub fn switching_family(gamma: f64) -> Result<(Generator, Generator, Generator), ControlError> {
    let (x, y) = generators(gamma)?;
    let f1 = Generator::new(x.matrix.sub(&y.matrix));
    let f2 = Generator::new(bracket(&x, &y));
    let f3 = Generator::new(bracket(&y, &f2));
    Ok((f1, f2, f3))
}

/// Max entrywise deviation over the six closure identities
/// `[F1,X] = F2`, `[F1,Y] = F2`, `[F2,X] = -s^2 F1`, `[F2,Y] = -F3`,
/// `[F3,X] = s^2 F2`, `[F3,Y] = F2`.
pub fn lie_closure_residual(gamma: f64) -> Result<f64, ControlError> {
    let (x, y) = generators(gamma)?;
    let (f1, f2, f3) = switching_family(gamma)?;
    let s2 = math::sin(gamma) * math::sin(gamma);
    let checks = [
        bracket(&f1, &x).max_abs_diff(&f2.matrix),
        bracket(&f1, &y).max_abs_diff(&f2.matrix),
        bracket(&f2, &x).max_abs_diff(&f1.matrix.scaled(-s2)),
        bracket(&f2, &y).max_abs_diff(&f3.matrix.scaled(-1.0)),
        bracket(&f3, &x).max_abs_diff(&f2.matrix.scaled(s2)),
        bracket(&f3, &y).max_abs_diff(&f2.matrix),
    ];
    let mut worst = 0.0;
    for r in checks {
        worst = math::fmax(worst, r);
    }
    Ok(worst)
}

/// `exp(t A)` through the axis-angle closed form: for a skew matrix with
/// axis norm `w`, `exp(tA) = I + sin(wt)/w A + (1 - cos(wt))/w^2 A^2`.
/// Exactly orthogonal with determinant +1 up to rounding.
pub fn rotation(generator: &Generator, t: f64) -> ReducedOperator {
    let m = &generator.matrix.0;
    let axis = [m[2][1], m[0][2], m[1][0]];
    let w = norm(&axis);
    let angle = w * t;
    let matrix = if w == 0.0 {
        Mat3::identity()
    } else if math::abs(angle) < 1e-8 {
        // Second-order expansion; below this angle it is exact to f64.
        let a = &generator.matrix;
        Mat3::identity().add(&a.scaled(t)).add(&a.mul(a).scaled(0.5 * t * t))
    } else {
        let a = &generator.matrix;
        let sin_term = math::sin(angle) / w;
        let cos_term = (1.0 - math::cos(angle)) / (w * w);
        Mat3::identity().add(&a.scaled(sin_term)).add(&a.mul(a).scaled(cos_term))
    };
    ReducedOperator { matrix }
}

/// Reduced switching variables `(phi1, phi2, phi3)`: the pairings of the
/// costate with `F1`, `F2`, `F3`. `phi1` is the switching function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiTriple {
    pub phi1: f64,
    pub phi2: f64,
    pub phi3: f64,
}

impl PhiTriple {
    pub fn new(phi1: f64, phi2: f64, phi3: f64) -> Self {
        PhiTriple { phi1, phi2, phi3 }
    }

    pub fn magnitude(&self) -> f64 {
        norm(&[self.phi1, self.phi2, self.phi3])
    }
}

/// Closed-form reduced variables along an X-arc issued from switching data
/// `(0, a, b)`:
/// `phi1 = (a/s) sin(st)`, `phi2 = a cos(st)`, `phi3 = b + a s sin(st)`.
pub fn phi_arc_x(a: f64, b: f64, gamma: f64, t: f64) -> PhiTriple {
    let s = math::sin(gamma);
    let sin_st = math::sin(s * t);
    PhiTriple::new(a / s * sin_st, a * math::cos(s * t), b + a * s * sin_st)
}

/// Closed-form reduced variables along a Y-arc issued from switching data
/// `(0, a, b)`:
/// `phi1 = a sin t + b (cos t - 1)`, `phi2 = a cos t - b sin t`,
/// `phi3 = a sin t + b cos t`.
pub fn phi_arc_y(a: f64, b: f64, t: f64) -> PhiTriple {
    let (sin_t, cos_t) = (math::sin(t), math::cos(t));
    PhiTriple::new(
        a * sin_t + b * (cos_t - 1.0),
        a * cos_t - b * sin_t,
        a * sin_t + b * cos_t,
    )
}

/// First positive zero of the switching function on an X-arc from the
/// switching surface: one half-period of the harmonic oscillation.
pub fn tau_x(gamma: f64) -> f64 {
    core::f64::consts::PI / math::sin(gamma)
}

/// First positive zero of the switching function on a Y-arc from switching
/// data `(0, a, b)`: the smallest `tau` in `(0, 2*pi]` with
/// `a cos(tau/2) - b sin(tau/2) = 0`, via the two-argument arctangent with
/// the branch shifted into the interval. `a = 0` lands on `2*pi`, the next
/// zero of `b (cos t - 1)`.
pub fn first_switch_y(a: f64, b: f64) -> Result<f64, ControlError> {
    if a == 0.0 && b == 0.0 {
        return Err(ControlError::DegenerateSwitchData);
    }
    if a == 0.0 {
        return Ok(TWO_PI);
    }
    let half = math::atan2(a, b);
    let tau = 2.0 * half;
    Ok(if tau > 0.0 { tau } else { tau + TWO_PI })
}

/// The two bang controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BangControl {
    X,
    Y,
}

impl BangControl {
    pub fn symbol(self) -> char {
        match self {
            BangControl::X => 'X',
            BangControl::Y => 'Y',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtremalSample {
    pub t: f64,
    pub state: Vec3,
    pub costate: Vec3,
    pub phi: PhiTriple,
    pub control: BangControl,
    pub hamiltonian: f64,
}

/// One constant-control stretch of a simulated extremal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcRecord {
    pub control: BangControl,
    pub start_time: f64,
    pub duration: f64,
    /// Reduced variables at the arc start.
    pub start_phi: PhiTriple,
    /// True when the arc ends on the switching surface (rather than at the
    /// horizon or a no-crossing tail).
    pub ends_at_switch: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtremalTrajectory {
    pub gamma: f64,
    pub horizon: f64,
    pub samples: Vec<ExtremalSample>,
    pub switch_times: Vec<f64>,
    pub arcs: Vec<ArcRecord>,
    /// Set when the simulation stopped because the switching function and
    /// its derivative vanished together (potential singular point); the
    /// value is the halt time. No control is invented past it.
    pub singular_halt: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtremalOptions {
    /// Uniform sampling interval.
    pub sample_dt: f64,
    /// Scale-relative threshold under which `phi1` counts as on-surface.
    pub surface_tolerance: f64,
    /// Bisection window width for interior-start switch location.
    pub bisection_tolerance: f64,
}

impl Default for ExtremalOptions {
    fn default() -> Self {
        ExtremalOptions {
            sample_dt: 1e-2,
            surface_tolerance: 1e-12,
            bisection_tolerance: 1e-13,
        }
    }
}

struct ControlSystem {
    s: f64,
    x: Generator,
    y: Generator,
    f1: Mat3,
    f2: Mat3,
    f3: Mat3,
}

impl ControlSystem {
    fn new(gamma: f64) -> Result<Self, ControlError> {
        let (x, y) = generators(gamma)?;
        let (f1, f2, f3) = switching_family(gamma)?;
        Ok(ControlSystem {
            s: math::sin(gamma),
            x,
            y,
            f1: f1.matrix,
            f2: f2.matrix,
            f3: f3.matrix,
        })
    }

    fn phis(&self, state: &Vec3, costate: &Vec3) -> PhiTriple {
        PhiTriple::new(
            dot(costate, &self.f1.mul_vec(state)),
            dot(costate, &self.f2.mul_vec(state)),
            dot(costate, &self.f3.mul_vec(state)),
        )
    }

    fn hamiltonian(&self, state: &Vec3, costate: &Vec3) -> f64 {
        let hx = dot(costate, &self.x.matrix.mul_vec(state));
        let hy = dot(costate, &self.y.matrix.mul_vec(state));
        math::fmax(hx, hy) - 1.0
    }

    fn generator(&self, control: BangControl) -> &Generator {
        match control {
            BangControl::X => &self.x,
            BangControl::Y => &self.y,
        }
    }

    /// Switching function along the active arc from arbitrary start data,
    /// in closed form.
    fn phi1_along(&self, control: BangControl, start: &PhiTriple, t: f64) -> f64 {
        match control {
            BangControl::X => {
                start.phi1 * math::cos(self.s * t) + start.phi2 / self.s * math::sin(self.s * t)
            }
            BangControl::Y => {
                start.phi1
                    + start.phi2 * math::sin(t)
                    + start.phi3 * (math::cos(t) - 1.0)
            }
        }
    }

    /// First positive zero of `phi1` on the current arc, or `None` when the
    /// switching function never crosses (the arc runs out the horizon).
    /// On-surface starts use the analytic formulas; interior starts bracket
    /// a sign change on a fine grid and bisect.
    fn next_switch(
        &self,
        control: BangControl,
        start: &PhiTriple,
        on_surface: bool,
        options: &ExtremalOptions,
    ) -> Option<f64> {
        if on_surface {
            return match control {
                BangControl::X => Some(core::f64::consts::PI / self.s),
                // a = phi2, b = phi3 at an on-surface point
                BangControl::Y => first_switch_y(start.phi2, start.phi3).ok(),
            };
        }
        let window = match control {
            BangControl::X => core::f64::consts::PI / self.s * 1.0001,
            BangControl::Y => TWO_PI * 1.0001,
        };
        const SCAN_STEPS: usize = 4096;
        let dt = window / SCAN_STEPS as f64;
        let mut prev_t = 0.0;
        let mut prev_v = start.phi1;
        for k in 1..=SCAN_STEPS {
            let t = dt * k as f64;
            let v = self.phi1_along(control, start, t);
            if v == 0.0 {
                return Some(t);
            }
            if v.signum() != prev_v.signum() {
                // Bisection inside [prev_t, t].
                let (mut lo, mut hi) = (prev_t, t);
                let mut lo_v = prev_v;
                while hi - lo > options.bisection_tolerance {
                    let mid = 0.5 * (lo + hi);
                    let mv = self.phi1_along(control, start, mid);
                    if mv == 0.0 {
                        return Some(mid);
                    }
                    if mv.signum() == lo_v.signum() {
                        lo = mid;
                        lo_v = mv;
                    } else {
                        hi = mid;
                    }
                }
                return Some(0.5 * (lo + hi));
            }
            prev_t = t;
            prev_v = v;
        }
        None
    }
}

/// Integrates the bang-bang extremal from `(psi0, p0)`: the active generator
/// is selected by the sign of the switching function, arcs advance by
/// closed-form rotations, and switch times come from the analytic
/// first-zero formulas (on-surface) or bracketing plus bisection (interior
/// starts). If the switching function and its derivative vanish together at
/// a decision point, the trajectory halts with a singular diagnostic.
pub fn simulate_extremal(
    gamma: f64,
    psi0: Vec3,
    p0: Vec3,
    horizon: f64,
) -> Result<ExtremalTrajectory, ControlError> {
    simulate_extremal_with(gamma, psi0, p0, horizon, &ExtremalOptions::default())
}

pub fn simulate_extremal_with(
    gamma: f64,
    psi0: Vec3,
    p0: Vec3,
    horizon: f64,
    options: &ExtremalOptions,
) -> Result<ExtremalTrajectory, ControlError> {
    let system = ControlSystem::new(gamma)?;
    if norm(&p0) == 0.0 {
        return Err(ControlError::ZeroCostate);
    }

    let mut trajectory = ExtremalTrajectory {
        gamma,
        horizon,
        samples: Vec::new(),
        switch_times: Vec::new(),
        arcs: Vec::new(),
        singular_halt: None,
    };

    let mut t = 0.0;
    let mut state = psi0;
    let mut costate = p0;
    let mut next_sample = 0.0;

    while t < horizon {
        let phi = system.phis(&state, &costate);
        let scale = math::fmax(1.0, phi.magnitude());
        let on_surface = math::abs(phi.phi1) <= options.surface_tolerance * scale;
        let control = if on_surface {
            if math::abs(phi.phi2) <= options.surface_tolerance * scale {
                // phi1 = phi2 = 0: the sign rule selects nothing.
                trajectory.singular_halt = Some(t);
                break;
            }
            if phi.phi2 > 0.0 {
                BangControl::X
            } else {
                BangControl::Y
            }
        } else if phi.phi1 > 0.0 {
            BangControl::X
        } else {
            BangControl::Y
        };

        let zero = system.next_switch(control, &phi, on_surface, options);
        let remaining = horizon - t;
        let (duration, ends_at_switch) = match zero {
            Some(z) if z <= remaining => (z, true),
            _ => (remaining, false),
        };

        let generator = system.generator(control);
        // Uniform samples inside (t, t + duration], plus the t = 0 sample.
        if t == 0.0 {
            trajectory.samples.push(ExtremalSample {
                t,
                state,
                costate,
                phi,
                control,
                hamiltonian: system.hamiltonian(&state, &costate),
            });
            next_sample = options.sample_dt;
        }
        while next_sample <= t + duration + 1e-15 {
            let local = next_sample - t;
            let rot = rotation(generator, local);
            let sample_state = rot.matrix.mul_vec(&state);
            let sample_costate = rot.matrix.mul_vec(&costate);
            trajectory.samples.push(ExtremalSample {
                t: next_sample,
                state: sample_state,
                costate: sample_costate,
                phi: system.phis(&sample_state, &sample_costate),
                control,
                hamiltonian: system.hamiltonian(&sample_state, &sample_costate),
            });
            next_sample += options.sample_dt;
        }

        let rot = rotation(generator, duration);
        state = rot.matrix.mul_vec(&state);
        costate = rot.matrix.mul_vec(&costate);
        trajectory.arcs.push(ArcRecord {
            control,
            start_time: t,
            duration,
            start_phi: phi,
            ends_at_switch,
        });
        t += duration;
        if ends_at_switch {
            trajectory.switch_times.push(t);
        } else {
            break;
        }
    }

    Ok(trajectory)
}

/// The compression ledger for interior three-bang blocks at a given Y-arc
/// length: block lengths `L_YXY = 2 pi + pi/s` and `L_XYX = 2 pi/s + ell`,
/// replacement arcs `tau_X = pi/s` and `ell`, and the resulting gaps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompressionReport {
    pub gamma: f64,
    pub y_length: f64,
    pub yxy_block_length: f64,
    pub xyx_block_length: f64,
    pub x_replacement_length: f64,
    pub y_replacement_length: f64,
    pub yxy_gap: f64,
    pub xyx_gap: f64,
}

pub fn compression_report(gamma: f64, y_length: f64) -> Result<CompressionReport, ControlError> {
    check_gamma(gamma)?;
    if !(y_length > 0.0 && y_length < TWO_PI) {
        return Err(ControlError::DegenerateSwitchData);
    }
    let s = math::sin(gamma);
    let x_replacement_length = core::f64::consts::PI / s;
    let yxy_block_length = TWO_PI + x_replacement_length;
    let xyx_block_length = 2.0 * core::f64::consts::PI / s + y_length;
    Ok(CompressionReport {
        gamma,
        y_length,
        yxy_block_length,
        xyx_block_length,
        x_replacement_length,
        y_replacement_length: y_length,
        yxy_gap: yxy_block_length - x_replacement_length,
        xyx_gap: xyx_block_length - y_length,
    })
}

/// Endpoint structure checks from the continuum initial state `(0, s, c)`:
/// the u-component is frozen along any Y-arc, and along an X-arc it follows
/// `c cos(s tau)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EndpointReport {
    pub gamma: f64,
    pub tau: f64,
    /// Max |<u|psi_Y(t)> - cos gamma| on the grid.
    pub y_drift_max: f64,
    /// u-component after the X-arc of length `tau`.
    pub x_u_at_tau: f64,
    /// The closed form `cos(gamma) cos(s tau)`.
    pub x_closed_form_at_tau: f64,
    /// Max |<u|psi_X(t)> - c cos(st)| on the grid.
    pub x_deviation_max: f64,
    pub grid_points: usize,
}

pub fn endpoint_checks(gamma: f64, tau: f64) -> Result<EndpointReport, ControlError> {
    endpoint_checks_with_grid(gamma, tau, 1000)
}

pub fn endpoint_checks_with_grid(
    gamma: f64,
    tau: f64,
    grid_points: usize,
) -> Result<EndpointReport, ControlError> {
    check_gamma(gamma)?;
    if tau < 0.0 {
        return Err(ControlError::DegenerateSwitchData);
    }
    let s = math::sin(gamma);
    let c = math::cos(gamma);
    let (x, y) = generators(gamma)?;
    let start = [0.0, s, c];

    let mut y_drift_max = 0.0;
    let mut x_deviation_max = 0.0;
    for k in 0..=grid_points {
        let t = tau * k as f64 / grid_points as f64;
        let y_state = rotation(&y, t).matrix.mul_vec(&start);
        y_drift_max = math::fmax(y_drift_max, math::abs(y_state[2] - c));
        let x_state = rotation(&x, t).matrix.mul_vec(&start);
        x_deviation_max = math::fmax(x_deviation_max, math::abs(x_state[2] - c * math::cos(s * t)));
    }
    let x_u_at_tau = rotation(&x, tau).matrix.mul_vec(&start)[2];
    Ok(EndpointReport {
        gamma,
        tau,
        y_drift_max,
        x_u_at_tau,
        x_closed_form_at_tau: c * math::cos(s * tau),
        x_deviation_max,
        grid_points: grid_points + 1,
    })
}
