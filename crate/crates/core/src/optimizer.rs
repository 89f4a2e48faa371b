//! Minimum-time arc schedules hitting the terminal plane: per-pattern
//! optimization with the final arc eliminated by a root-solve, pattern
//! comparison tables, and the continuum image of the three-step discrete
//! schedule together with the query/time mapping.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::control::{generators, rotation, BangControl, ControlError};
use crate::grk::{optimal_alpha, optimal_eta, GrkError};
use crate::linalg::Vec3;
use crate::math;
use crate::reduced::DatabaseGeometry;
use crate::rng::SplitMix64;

const PI: f64 = core::f64::consts::PI;
const TWO_PI: f64 = 2.0 * PI;

/// Arcs shorter than this are dropped from returned schedules so phantom
/// switchings never appear in pattern reports.
pub const PRUNE_TOLERANCE: f64 = 1e-9;

/// Function-value convergence tolerance of the simplex refinement.
pub const REFINE_TOLERANCE: f64 = 1e-10;

/// Multi-start count: the three-step prediction plus eight perturbations.
const PERTURBATION_COUNT: usize = 8;
const PERTURBATION_RADIUS: f64 = 0.2;
const MULTISTART_SEED: u64 = 0x9a75_3bd1_0c2e_4f81;

const MAX_ARCS: usize = 7;

/// Alternating bang plan: per-arc controls with nonnegative durations.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcSchedule {
    pub pattern: Vec<BangControl>,
    pub durations: Vec<f64>,
}

impl ArcSchedule {
    pub fn new(pattern: Vec<BangControl>, durations: Vec<f64>) -> Result<Self, OptimizeError> {
        if pattern.len() != durations.len() {
            return Err(OptimizeError::MalformedSchedule);
        }
        if durations.iter().any(|d| !(*d >= 0.0)) {
            return Err(OptimizeError::MalformedSchedule);
        }
        if pattern.windows(2).any(|w| w[0] == w[1]) {
            return Err(OptimizeError::MalformedSchedule);
        }
        Ok(ArcSchedule { pattern, durations })
    }

    pub fn empty() -> Self {
        ArcSchedule { pattern: Vec::new(), durations: Vec::new() }
    }

    pub fn total_time(&self) -> f64 {
        self.durations.iter().sum()
    }

    pub fn switching_count(&self) -> usize {
        self.pattern.len().saturating_sub(1)
    }

    /// Drops arcs below the prune tolerance and merges the same-type
    /// neighbors that become adjacent.
    pub fn pruned(&self) -> ArcSchedule {
        let mut pattern: Vec<BangControl> = Vec::new();
        let mut durations: Vec<f64> = Vec::new();
        for (&control, &duration) in self.pattern.iter().zip(&self.durations) {
            if duration < PRUNE_TOLERANCE {
                continue;
            }
            if pattern.last() == Some(&control) {
                *durations.last_mut().expect("pattern and durations stay in sync") += duration;
            } else {
                pattern.push(control);
                durations.push(duration);
            }
        }
        ArcSchedule { pattern, durations }
    }
}

pub fn pattern_string(pattern: &[BangControl]) -> alloc::string::String {
    pattern.iter().map(|c| c.symbol()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OptimizeError {
    MalformedSchedule,
    /// Patterns must end with the global generator; a final local arc
    /// cannot move the state onto the terminal plane.
    EndsWithLocalArc,
    TooManyArcs { arcs: usize },
    EmptyPattern,
    /// The residual along the final arc never crosses zero from any start.
    InfeasibleStart,
    Control(ControlError),
    Grk(GrkError),
}

impl fmt::Display for OptimizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptimizeError::MalformedSchedule => write!(f, "schedule is not a valid alternating plan"),
            OptimizeError::EndsWithLocalArc => {
                write!(f, "pattern ends with a local arc, which leaves the terminal residual unchanged")
            }
            OptimizeError::TooManyArcs { arcs } => {
                write!(f, "pattern has {arcs} arcs, supported maximum is {MAX_ARCS}")
            }
            OptimizeError::EmptyPattern => write!(f, "pattern must contain at least one arc"),
            OptimizeError::InfeasibleStart => {
                write!(f, "no zero of the terminal residual within one period of the final arc")
            }
            OptimizeError::Control(e) => write!(f, "{e}"),
            OptimizeError::Grk(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for OptimizeError {}

impl From<ControlError> for OptimizeError {
    fn from(e: ControlError) -> Self {
        OptimizeError::Control(e)
    }
}

impl From<GrkError> for OptimizeError {
    fn from(e: GrkError) -> Self {
        OptimizeError::Grk(e)
    }
}

/// The continuum initial state `(0, sin gamma, cos gamma)`.
pub fn continuum_initial_state(gamma: f64) -> Vec3 {
    [0.0, math::sin(gamma), math::cos(gamma)]
}

/// Which plane a schedule must hit.
///
/// The generator flow is orientation-preserving, but one discrete global
/// step also carries a reflection (its determinant is -1). A word with an
/// odd number of global steps therefore ends with a reflection the flow
/// cannot express: its continuum shadow must stop on the pullback of the
/// success plane under that reflection, and the trailing global step (one
/// oracle query, vanishing continuum time) finishes the job.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminalPlane {
    /// The success plane itself: zero amplitude on the non-target blocks.
    /// Continuum limit of words with an even global count.
    Direct,
    /// The success plane pulled back through the reflection part of one
    /// global step. Continuum limit of words with an odd global count,
    /// including the three-step family.
    Reflected,
}

impl TerminalPlane {
    /// Unit normal of the plane.
    pub fn normal(&self, gamma: f64) -> Vec3 {
        let s = math::sin(gamma);
        let c = math::cos(gamma);
        match self {
            TerminalPlane::Direct => [0.0, 0.0, 1.0],
            TerminalPlane::Reflected => [0.0, 2.0 * s * c, 2.0 * c * c - 1.0],
        }
    }
}

/// State after running the schedule's rotations from the continuum initial
/// state.
pub fn schedule_endpoint(gamma: f64, schedule: &ArcSchedule) -> Result<Vec3, OptimizeError> {
    let (x, y) = generators(gamma)?;
    let mut state = continuum_initial_state(gamma);
    for (control, &duration) in schedule.pattern.iter().zip(&schedule.durations) {
        let generator = match control {
            BangControl::X => &x,
            BangControl::Y => &y,
        };
        state = rotation(generator, duration).matrix.mul_vec(&state);
    }
    Ok(state)
}

/// u-component after running the schedule's rotations from the continuum
/// initial state; zero means the plan solves the continuum problem.
pub fn terminal_residual(gamma: f64, schedule: &ArcSchedule) -> Result<f64, OptimizeError> {
    plane_residual(gamma, schedule, TerminalPlane::Direct)
}

/// Signed distance of the schedule endpoint from a terminal plane.
pub fn plane_residual(
    gamma: f64,
    schedule: &ArcSchedule,
    plane: TerminalPlane,
) -> Result<f64, OptimizeError> {
    let state = schedule_endpoint(gamma, schedule)?;
    Ok(crate::linalg::dot(&plane.normal(gamma), &state))
}

/// Per-pattern optimization outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternOptimum {
    pub requested: Vec<BangControl>,
    pub plane: TerminalPlane,
    /// All arc durations including the root-solved final arc, before
    /// pruning.
    pub durations: Vec<f64>,
    /// Returned schedule with sub-tolerance arcs pruned.
    pub schedule: ArcSchedule,
    pub total_time: f64,
    pub terminal_residual: f64,
}

struct PatternProblem {
    gamma: f64,
    s: f64,
    pattern: Vec<BangControl>,
    /// Rotation generators per free arc.
    x: crate::control::Generator,
    y: crate::control::Generator,
    /// Normal of the plane the final arc must reach.
    normal: Vec3,
    /// Upper bound per free duration: one full period of its flow.
    upper: Vec<f64>,
}

impl PatternProblem {
    fn new(gamma: f64, pattern: &[BangControl], plane: TerminalPlane) -> Result<Self, OptimizeError> {
        if pattern.is_empty() {
            return Err(OptimizeError::EmptyPattern);
        }
        if pattern.len() > MAX_ARCS {
            return Err(OptimizeError::TooManyArcs { arcs: pattern.len() });
        }
        if pattern.windows(2).any(|w| w[0] == w[1]) {
            return Err(OptimizeError::MalformedSchedule);
        }
        if *pattern.last().expect("nonempty") != BangControl::X {
            return Err(OptimizeError::EndsWithLocalArc);
        }
        let (x, y) = generators(gamma)?;
        let s = math::sin(gamma);
        let upper = pattern[..pattern.len() - 1]
            .iter()
            .map(|c| match c {
                BangControl::X => TWO_PI / s,
                BangControl::Y => TWO_PI,
            })
            .collect();
        Ok(PatternProblem {
            gamma,
            s,
            pattern: pattern.to_vec(),
            x,
            y,
            normal: plane.normal(gamma),
            upper,
        })
    }

    fn free_dims(&self) -> usize {
        self.pattern.len() - 1
    }

    fn clamp(&self, free: &mut [f64]) {
        for (value, &hi) in free.iter_mut().zip(&self.upper) {
            if !(*value >= 0.0) {
                *value = 0.0;
            } else if *value > hi {
                *value = hi;
            }
        }
    }

    fn state_before_final(&self, free: &[f64]) -> Vec3 {
        let mut state = continuum_initial_state(self.gamma);
        for (control, &duration) in self.pattern.iter().zip(free) {
            let generator = match control {
                BangControl::X => &self.x,
                BangControl::Y => &self.y,
            };
            state = rotation(generator, duration).matrix.mul_vec(&state);
        }
        state
    }

    /// First zero of the plane residual along the final X-arc from `state`,
    /// located by bracketing on a fine grid and bisecting. `None` when the
    /// residual never crosses within one full period.
    fn final_arc_root(&self, state: &Vec3) -> Option<f64> {
        // <n, exp(tX) state> = A + B cos(st) + C sin(st) along the X flow,
        // whose unit axis is (0, c, -s).
        let c = math::cos(self.gamma);
        let axis = [0.0, c, -self.s];
        let normal = &self.normal;
        let offset = crate::linalg::dot(normal, &axis) * crate::linalg::dot(&axis, state);
        let cos_coeff = crate::linalg::dot(normal, state) - offset;
        let cross = [
            axis[1] * state[2] - axis[2] * state[1],
            axis[2] * state[0] - axis[0] * state[2],
            axis[0] * state[1] - axis[1] * state[0],
        ];
        let sin_coeff = crate::linalg::dot(normal, &cross);

        let u_at = |t: f64| offset + cos_coeff * math::cos(self.s * t) + sin_coeff * math::sin(self.s * t);
        if math::abs(u_at(0.0)) <= 1e-14 {
            return Some(0.0);
        }
        let period = TWO_PI / self.s;
        const SCAN: usize = 1024;
        let dt = period / SCAN as f64;
        let mut prev_t = 0.0;
        let mut prev_v = u_at(0.0);
        for k in 1..=SCAN {
            let t = dt * k as f64;
            let v = u_at(t);
            if v == 0.0 {
                return Some(t);
            }
            if v.signum() != prev_v.signum() {
                let (mut lo, mut hi) = (prev_t, t);
                let mut lo_v = prev_v;
                for _ in 0..80 {
                    if hi - lo <= 1e-14 {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    let mv = u_at(mid);
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

    /// Total time for the free durations, or infinity when infeasible.
    fn objective(&self, free: &[f64]) -> f64 {
        let mut clamped: Vec<f64> = free.to_vec();
        self.clamp(&mut clamped);
        let state = self.state_before_final(&clamped);
        match self.final_arc_root(&state) {
            Some(root) => clamped.iter().sum::<f64>() + root,
            None => f64::INFINITY,
        }
    }
}

/// Derivative-free simplex minimization (function values only), clamped to
/// the box inside the objective. Deterministic for fixed inputs.
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    objective: &F,
    start: &[f64],
    step: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> (Vec<f64>, f64) {
    let n = start.len();
    if n == 0 {
        return (Vec::new(), objective(start));
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), objective(start)));
    for i in 0..n {
        let mut vertex = start.to_vec();
        vertex[i] += step[i];
        let value = objective(&vertex);
        simplex.push((vertex, value));
    }

    for _ in 0..max_iterations {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if worst.is_finite() && worst - best < tolerance {
            break;
        }

        let mut centroid = vec![0.0; n];
        for (vertex, _) in &simplex[..n] {
            for i in 0..n {
                centroid[i] += vertex[i] / n as f64;
            }
        }
        let reflect = |factor: f64| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for i in 0..n {
                out[i] = centroid[i] + factor * (centroid[i] - simplex[n].0[i]);
            }
            out
        };

        let reflected = reflect(1.0);
        let reflected_value = objective(&reflected);
        if reflected_value < simplex[0].1 {
            let expanded = reflect(2.0);
            let expanded_value = objective(&expanded);
            simplex[n] = if expanded_value < reflected_value {
                (expanded, expanded_value)
            } else {
                (reflected, reflected_value)
            };
        } else if reflected_value < simplex[n - 1].1 {
            simplex[n] = (reflected, reflected_value);
        } else {
            let contracted = reflect(-0.5);
            let contracted_value = objective(&contracted);
            if contracted_value < simplex[n].1 {
                simplex[n] = (contracted, contracted_value);
            } else {
                let best_vertex = simplex[0].0.clone();
                for (vertex, value) in &mut simplex[1..] {
                    for i in 0..n {
                        vertex[i] = best_vertex[i] + 0.5 * (vertex[i] - best_vertex[i]);
                    }
                    *value = objective(vertex);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(core::cmp::Ordering::Equal));
    (simplex[0].0.clone(), simplex[0].1)
}

/// Starting points: the three-step continuum prediction mapped onto the
/// pattern, eight seeded perturbations of it, the all-zero corner, and the
/// best few coarse-grid points.
fn multistarts(problem: &PatternProblem) -> Vec<Vec<f64>> {
    let dims = problem.free_dims();
    if dims == 0 {
        return vec![Vec::new()];
    }
    let block_count = 1.0 / (problem.s * problem.s);
    let t1 = optimal_eta(block_count)
        .map(|eta| math::fmax(PI / (2.0 * problem.s) - 2.0 * eta, 0.0))
        .unwrap_or(0.0);
    let t2 = optimal_alpha(block_count).map(|alpha| 2.0 * alpha).unwrap_or(1.0);

    let mut prediction = vec![0.0; dims];
    for (i, control) in problem.pattern[..dims].iter().enumerate() {
        prediction[i] = match (i, control) {
            (0, BangControl::X) => t1,
            (_, BangControl::X) => PI / problem.s,
            (0, BangControl::Y) => 0.1,
            (_, BangControl::Y) => if i == 1 && problem.pattern[0] == BangControl::X { t2 } else { PI },
        };
    }
    problem.clamp(&mut prediction);

    let mut starts = vec![prediction.clone(), vec![0.0; dims]];
    let mut rng = SplitMix64::new(MULTISTART_SEED);
    for _ in 0..PERTURBATION_COUNT {
        let mut point = prediction.clone();
        for (value, &hi) in point.iter_mut().zip(&problem.upper) {
            let base = if *value > 0.0 { *value } else { 0.1 * hi };
            *value += base * PERTURBATION_RADIUS * rng.range(-1.0, 1.0);
        }
        problem.clamp(&mut point);
        starts.push(point);
    }

    // Coarse grid, best three points kept as extra starts.
    let per_dim = match dims {
        1 => 65,
        2 => 33,
        3 => 17,
        4 => 9,
        _ => 7,
    };
    let mut graded: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut index = vec![0usize; dims];
    loop {
        let point: Vec<f64> = index
            .iter()
            .zip(&problem.upper)
            .map(|(&i, &hi)| hi * i as f64 / (per_dim - 1) as f64)
            .collect();
        graded.push((problem.objective(&point), point));
        let mut dim = 0;
        loop {
            index[dim] += 1;
            if index[dim] < per_dim {
                break;
            }
            index[dim] = 0;
            dim += 1;
            if dim == dims {
                break;
            }
        }
        if dim == dims {
            break;
        }
    }
    graded.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    for (value, point) in graded.into_iter().take(3) {
        if value.is_finite() {
            starts.push(point);
        }
    }
    starts
}

/// Minimizes total time over the pattern's durations subject to hitting the
/// success plane: the final arc is eliminated by the root-solve, the rest
/// by coarse grid plus simplex refinement from the multi-starts.
pub fn optimize_pattern(gamma: f64, pattern: &[BangControl]) -> Result<PatternOptimum, OptimizeError> {
    optimize_pattern_on(gamma, pattern, TerminalPlane::Direct)
}

/// As [`optimize_pattern`], with an explicit terminal plane.
pub fn optimize_pattern_on(
    gamma: f64,
    pattern: &[BangControl],
    plane: TerminalPlane,
) -> Result<PatternOptimum, OptimizeError> {
    let problem = PatternProblem::new(gamma, pattern, plane)?;
    let objective = |free: &[f64]| problem.objective(free);

    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in multistarts(&problem) {
        let step: Vec<f64> = problem.upper.iter().map(|&hi| math::fmax(0.05 * hi, 0.02)).collect();
        let (point, value) =
            nelder_mead(&objective, &start, &step, REFINE_TOLERANCE, 400 * (problem.free_dims() + 1));
        if value.is_finite() && best.as_ref().map_or(true, |(_, b)| value < *b) {
            best = Some((point, value));
        }
    }
    let (mut free, _) = best.ok_or(OptimizeError::InfeasibleStart)?;
    problem.clamp(&mut free);
    let state = problem.state_before_final(&free);
    let last = problem.final_arc_root(&state).ok_or(OptimizeError::InfeasibleStart)?;

    let mut durations = free;
    durations.push(last);
    let full = ArcSchedule { pattern: pattern.to_vec(), durations: durations.clone() };
    let residual = plane_residual(gamma, &full, plane)?;
    let schedule = full.pruned();
    Ok(PatternOptimum {
        requested: pattern.to_vec(),
        plane,
        durations,
        schedule,
        total_time: full.total_time(),
        terminal_residual: residual,
    })
}

/// The alternating pattern with `arc_count` arcs that ends with X.
pub fn alternating_pattern(arc_count: usize) -> Vec<BangControl> {
    let mut pattern = vec![BangControl::X; arc_count];
    for (offset, slot) in pattern.iter_mut().rev().enumerate() {
        *slot = if offset % 2 == 0 { BangControl::X } else { BangControl::Y };
    }
    pattern
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatternComparison {
    pub gamma: f64,
    pub plane: TerminalPlane,
    pub rows: Vec<PatternOptimum>,
    /// Index of the best row under the (time, arc count, pattern) order.
    pub best_index: usize,
}

impl PatternComparison {
    pub fn best(&self) -> &PatternOptimum {
        &self.rows[self.best_index]
    }
}

/// Optimizes every alternating pattern ending in X with at most
/// `max_switches` switchings and reports each minimum.
pub fn compare_patterns(gamma: f64, max_switches: usize) -> Result<PatternComparison, OptimizeError> {
    compare_patterns_on(gamma, max_switches, TerminalPlane::Direct)
}

pub fn compare_patterns_on(
    gamma: f64,
    max_switches: usize,
    plane: TerminalPlane,
) -> Result<PatternComparison, OptimizeError> {
    if max_switches > MAX_ARCS - 1 {
        return Err(OptimizeError::TooManyArcs { arcs: max_switches + 1 });
    }
    let mut rows = Vec::new();
    for arcs in 1..=max_switches + 1 {
        rows.push(optimize_pattern_on(gamma, &alternating_pattern(arcs), plane)?);
    }
    let mut best_index = 0;
    for (i, row) in rows.iter().enumerate().skip(1) {
        let current = &rows[best_index];
        let candidate_key = (row.total_time, row.requested.len());
        let best_key = (current.total_time, current.requested.len());
        if candidate_key < best_key {
            best_index = i;
        }
    }
    Ok(PatternComparison { gamma, plane, rows, best_index })
}

/// Continuum image of the optimized three-step schedule at block count `K`:
/// `t1 = pi/(2s) - 2 eta_K` on the global arc and `t2 = 2 alpha_K` on the
/// local arc, with `s = 1/sqrt(K)`. One oracle query advances continuum
/// time by `2 theta2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuumGrkSchedule {
    pub block_count: f64,
    pub t1: f64,
    pub t2: f64,
    pub total_time: f64,
}

pub fn continuum_grk_schedule(block_count: f64) -> Result<ContinuumGrkSchedule, OptimizeError> {
    let alpha = optimal_alpha(block_count)?;
    let eta = optimal_eta(block_count)?;
    let s = 1.0 / math::sqrt(block_count);
    let t1 = PI / (2.0 * s) - 2.0 * eta;
    let t2 = 2.0 * alpha;
    Ok(ContinuumGrkSchedule { block_count, t1, t2, total_time: t1 + t2 })
}

/// Continuum time consumed by a number of oracle queries.
pub fn time_from_queries(queries: f64, geom: &DatabaseGeometry) -> f64 {
    queries * 2.0 * geom.theta2
}

/// Fractional query count equivalent to a stretch of continuum time.
pub fn queries_from_time(time: f64, geom: &DatabaseGeometry) -> f64 {
    time / (2.0 * geom.theta2)
}
