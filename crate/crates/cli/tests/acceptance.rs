//! Acceptance suite: one test per checklist item, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see the lines for passing
//! items; failing items carry the line in the panic message as well).
//!
//! Every tolerance is pinned here, in code. Items 8 and 10 contain clauses
//! that are implemented exactly as stated and fail for documented
//! mathematical reasons; the printed lines carry the measured values, and
//! the companion clauses that do hold are reported alongside.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6, PI};
use std::time::Instant;

use psearch::parallel;
use psearch_core::control::{
    compression_report, endpoint_checks, first_switch_y, lie_closure_residual, phi_arc_x,
    phi_arc_y, simulate_extremal_with, tau_x, ArcRecord, BangControl, ExtremalOptions,
    ExtremalTrajectory,
};
use psearch_core::grk::{constraint_residual, iteration_counts, optimal_alpha, optimal_eta};
use psearch_core::optimizer::{
    compare_patterns_on, continuum_grk_schedule, pattern_string, TerminalPlane,
};
use psearch_core::oracle::compare_with_reduced;
use psearch_core::reduced::{DatabaseGeometry, Letter, OperatorWord};
use psearch_core::rng::SplitMix64;
use psearch_core::search::{glg_scan, SearchBudget, SearchPlan};

const TWO_PI: f64 = 2.0 * PI;

/// Prints the per-criterion line and asserts.
fn criterion(id: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {id:02} {verdict} {detail}");
    println!("{line}");
    assert!(pass, "{line}");
}

fn random_word(rng: &mut SplitMix64, max_len: u64) -> OperatorWord {
    let len = rng.below(max_len + 1) as usize;
    let mut letters = Vec::with_capacity(len);
    for _ in 0..len {
        letters.push(if rng.next_u64() & 1 == 0 { Letter::Global } else { Letter::Local });
    }
    OperatorWord::from_letters(letters)
}

/// 1. Reduction fidelity: full-space versus reduced dynamics over every
/// geometry with 2 <= n <= 10, twenty random (target, word) runs each.
#[test]
fn criterion_01_reduction_fidelity() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0xace0_0001);
    let mut max_deviation = 0.0f64;
    let mut max_leakage = 0.0f64;
    let mut runs = 0u32;
    for n in 2..=10u32 {
        for m in 1..n {
            let geom = DatabaseGeometry::new(n, m).unwrap();
            for _ in 0..20 {
                let target = rng.below(geom.item_count);
                let word = random_word(&mut rng, 50);
                let report = compare_with_reduced(n, m, target, &word).unwrap();
                max_deviation = max_deviation.max(report.deviation);
                max_leakage = max_leakage.max(report.leakage);
                runs += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = max_deviation <= 1e-10 && max_leakage <= 1e-10 && elapsed <= 60.0;
    criterion(
        1,
        pass,
        &format!(
            "reduction fidelity: max deviation {max_deviation:.2e}, max leakage \
             {max_leakage:.2e} over {runs} runs in {elapsed:.1} s (limits 1e-10, 60 s)"
        ),
    );
}

/// 2. Closed-form parameter identities and limits.
#[test]
fn criterion_02_grk_parameter_identities() {
    let mut grid = vec![2.0f64, 3.0];
    for exponent in 2..=20u32 {
        grid.push((1u64 << exponent) as f64);
    }
    let mut worst = 0.0f64;
    for &block_count in &grid {
        let alpha = optimal_alpha(block_count).unwrap();
        let eta = optimal_eta(block_count).unwrap();
        worst = worst.max(constraint_residual(block_count, alpha, eta).abs());
    }
    let alpha_two_exact = optimal_alpha(2.0).unwrap() == FRAC_PI_4;
    let alpha_limit = (optimal_alpha(1e6).unwrap() - FRAC_PI_6).abs();
    let eta_limit = (optimal_eta(1e6).unwrap() - 3f64.sqrt() / 2.0).abs();
    let pass = worst <= 1e-10 && alpha_two_exact && alpha_limit <= 1e-3 && eta_limit <= 1e-3;
    criterion(
        2,
        pass,
        &format!(
            "parameter identities: max |constraint| {worst:.2e} over K grid (limit 1e-10), \
             alpha(2) == pi/4 exactly: {alpha_two_exact}, |alpha(1e6) - pi/6| = {alpha_limit:.2e}, \
             |eta(1e6) - sqrt(3)/2| = {eta_limit:.2e} (limits 1e-3)"
        ),
    );
}

/// 3. Discrete structural optimality at desk scale: the exhaustive optimum
/// is a three-step word whose query count equals the family scan's optimum.
#[test]
fn criterion_03_discrete_structural_optimality() {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut pass = true;
    for (n, m) in [(6u32, 3u32), (8, 4), (8, 3), (10, 5)] {
        let geom = DatabaseGeometry::new(n, m).unwrap();
        let max_len = (FRAC_PI_4 * (geom.item_count as f64).sqrt()).ceil() as u32 + 2;
        let budget = SearchBudget { max_words: 1 << 30 };
        let plan = SearchPlan::prepare(&geom, max_len, 0.01, budget).unwrap();
        // At least four workers so the scoped-thread path genuinely runs
        // even on single-core machines; the merge makes worker count moot.
        let threads = parallel::resolve_thread_count(None).max(4);
        let report = parallel::run_plan(&plan, threads);

        let best = report.best.as_ref().expect("a successful word exists within the cap");
        let runs = best.word.runs();
        let glg = report.glg_best.as_ref().expect("family scan ran");
        let shape_ok = best.word.switching_count() <= 2
            && runs.len() == 3
            && runs[0].0 == Letter::Global
            && runs[1].0 == Letter::Local
            && runs[2].0 == Letter::Global
            && runs.iter().all(|&(_, count)| count >= 1);
        let query_match = glg.achieved_epsilon && glg.queries == best.word.len() as u64;
        pass &= shape_ok && query_match;
        details.push(format!(
            "({n},{m}): len {} = {} [{}q glg ({},{})]",
            best.word.len(),
            psearch_core::reduced::run_pattern_string(&best.word),
            glg.queries,
            glg.k1,
            glg.k2
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed <= 600.0;
    criterion(
        3,
        pass,
        &format!(
            "discrete structural optimality (threads={}): {} in {elapsed:.1} s (limit 600 s)",
            parallel::resolve_thread_count(None).max(4),
            details.join("; ")
        ),
    );
}

/// 4. Refined counts agree with the family scan's threshold optimum.
#[test]
fn criterion_04_grk_vs_brute_force() {
    let mut details = Vec::new();
    let mut pass = true;
    for (n, m) in [(6u32, 3u32), (8, 4), (8, 3), (10, 5)] {
        let geom = DatabaseGeometry::new(n, m).unwrap();
        let params = iteration_counts(&geom).unwrap();
        let k1_max = (FRAC_PI_4 * (geom.item_count as f64).sqrt()).ceil() as u64 + 4;
        let k2_max = (FRAC_PI_4 * (geom.block_size as f64).sqrt()).ceil() as u64 + 4;
        let scan = glg_scan(&geom, k1_max, k2_max, 0.01);
        let ok = scan.achieved_epsilon
            && params.k1.abs_diff(scan.k1) <= 2
            && params.k2.abs_diff(scan.k2) <= 2;
        pass &= ok;
        details.push(format!(
            "({n},{m}): refined ({},{}) vs scan ({},{})",
            params.k1, params.k2, scan.k1, scan.k2
        ));
    }
    criterion(4, pass, &format!("refined counts within +-2 of scan optimum: {}", details.join("; ")));
}

/// 5. Commutator closure identities across the gamma range.
#[test]
fn criterion_05_lie_closure() {
    let mut rng = SplitMix64::new(0xace0_0005);
    let (lo, hi) = (1e-3f64.ln(), 0.99f64.ln());
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let s = (lo + (hi - lo) * rng.next_f64()).exp();
        let residual = lie_closure_residual(s.asin()).unwrap();
        worst = worst.max(residual);
    }
    criterion(
        5,
        worst <= 1e-13,
        &format!("closure identities: max residual {worst:.2e} over 100 log-uniform gammas (limit 1e-13)"),
    );
}

/// 6. Closed-form arc propagators versus fourth-order integration.
#[test]
fn criterion_06_arc_closed_forms() {
    fn derivative(control: BangControl, s: f64, v: [f64; 3]) -> [f64; 3] {
        match control {
            BangControl::X => [v[1], -s * s * v[0], s * s * v[1]],
            BangControl::Y => [v[1], -v[2], v[1]],
        }
    }
    fn rk4_step(control: BangControl, s: f64, v: [f64; 3], h: f64) -> [f64; 3] {
        let add = |a: [f64; 3], b: [f64; 3], w: f64| [a[0] + w * b[0], a[1] + w * b[1], a[2] + w * b[2]];
        let k1 = derivative(control, s, v);
        let k2 = derivative(control, s, add(v, k1, 0.5 * h));
        let k3 = derivative(control, s, add(v, k2, 0.5 * h));
        let k4 = derivative(control, s, add(v, k3, h));
        [
            v[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            v[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            v[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        ]
    }

    let mut rng = SplitMix64::new(0xace0_0006);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a = rng.range(-2.0, 2.0);
        let b = rng.range(-2.0, 2.0);
        let s = rng.range(0.1, 0.99);
        let gamma = s.asin();
        let horizon = 4.0 * PI / s;
        let steps = (horizon / 1e-3).ceil() as usize;
        let h = horizon / steps as f64;
        let mut x_state = [0.0, a, b];
        let mut y_state = [0.0, a, b];
        for k in 1..=steps {
            x_state = rk4_step(BangControl::X, s, x_state, h);
            y_state = rk4_step(BangControl::Y, s, y_state, h);
            let t = h * k as f64;
            let x_closed = phi_arc_x(a, b, gamma, t);
            let y_closed = phi_arc_y(a, b, t);
            for (numeric, closed) in [
                (x_state[0], x_closed.phi1),
                (x_state[1], x_closed.phi2),
                (x_state[2], x_closed.phi3),
                (y_state[0], y_closed.phi1),
                (y_state[1], y_closed.phi2),
                (y_state[2], y_closed.phi3),
            ] {
                worst = worst.max((numeric - closed).abs());
            }
        }
    }
    criterion(
        6,
        worst <= 1e-8,
        &format!("arc closed forms vs rk4: max deviation {worst:.2e} over 20 arcs to 4pi/s (limit 1e-8)"),
    );
}

/// 7. Universal switching map on both arc types.
#[test]
fn criterion_07_universal_switching_map() {
    let mut rng = SplitMix64::new(0xace0_0007);
    let mut worst = 0.0f64;
    let mut trials = 0;
    while trials < 100 {
        let a = rng.range(-3.0, 3.0);
        let b = rng.range(-3.0, 3.0);
        if a.abs() < 1e-3 {
            continue;
        }
        trials += 1;
        let gamma = rng.range(0.05, FRAC_PI_2 - 0.05);
        let x_end = phi_arc_x(a, b, gamma, tau_x(gamma));
        let tau_y = first_switch_y(a, b).unwrap();
        let y_end = phi_arc_y(a, b, tau_y);
        for residual in [
            x_end.phi1.abs(),
            (x_end.phi2 + a).abs(),
            (x_end.phi3 - b).abs(),
            y_end.phi1.abs(),
            (y_end.phi2 + a).abs(),
            (y_end.phi3 - b).abs(),
        ] {
            worst = worst.max(residual);
        }
    }
    let shifted_branch = (first_switch_y(-1.0, 1.0).unwrap() - 3.0 * FRAC_PI_2).abs();
    let pass = worst <= 1e-12 && shifted_branch <= 1e-12;
    criterion(
        7,
        pass,
        &format!(
            "universal switching map: max |(0,a,b) -> (0,-a,b)| residual {worst:.2e} over 100 \
             draws (limit 1e-12); tau_y(-1,1) off 3pi/2 by {shifted_branch:.2e}"
        ),
    );
}

/// Closed-form switching function along one arc from its recorded start.
fn phi1_along(arc: &ArcRecord, s: f64, t: f64) -> f64 {
    match arc.control {
        BangControl::X => arc.start_phi.phi1 * (s * t).cos() + arc.start_phi.phi2 / s * (s * t).sin(),
        BangControl::Y => {
            arc.start_phi.phi1 + arc.start_phi.phi2 * t.sin() + arc.start_phi.phi3 * (t.cos() - 1.0)
        }
    }
}

/// Longest stretch of trajectory time with |Phi| < 1e-10 throughout,
/// scanned at 2.5e-4 resolution on the closed-form switching function.
fn longest_small_phi_interval(trajectory: &ExtremalTrajectory, s: f64) -> f64 {
    const GRID: f64 = 2.5e-4;
    let mut longest = 0.0f64;
    let mut current = 0.0f64;
    for arc in &trajectory.arcs {
        let steps = (arc.duration / GRID).ceil() as usize;
        for k in 0..steps {
            let t = (k as f64 * GRID).min(arc.duration);
            if phi1_along(arc, s, t).abs() < 1e-10 {
                current += GRID;
                longest = longest.max(current);
            } else {
                current = 0.0;
            }
        }
    }
    longest
}

/// 8. Extremal simulation invariants. The consecutive-Y-pair clause is
/// implemented exactly as stated and fails: switch data repeats as
/// (0, +-a, b), so consecutive Y-arcs have equal lengths 2*atan2-angle(a,b),
/// and only the opposite-data pair tau_y(a,b) + tau_y(-a,b) sums to 2 pi.
#[test]
fn criterion_08_extremal_simulation() {
    let mut rng = SplitMix64::new(0xace0_0008);
    let block_counts = [4.0f64, 16.0, 64.0];
    let mut h_drift_max = 0.0f64;
    let mut x_gap_max = 0.0f64;
    let mut y_pair_worst = 0.0f64;
    let mut y_equal_worst = 0.0f64;
    let mut y_pairs = 0u32;
    let mut small_phi_max = 0.0f64;

    for trial in 0..50u32 {
        let block_count = block_counts[(trial % 3) as usize];
        let gamma = (1.0 / block_count.sqrt()).asin();
        let s = gamma.sin();
        let psi0 = [0.0, s, gamma.cos()];
        let mut p0 = [0.0f64; 3];
        loop {
            for slot in &mut p0 {
                *slot = rng.range(-1.0, 1.0);
            }
            let norm = (p0[0] * p0[0] + p0[1] * p0[1] + p0[2] * p0[2]).sqrt();
            if norm > 0.1 {
                for slot in &mut p0 {
                    *slot /= norm;
                }
                break;
            }
        }
        let options = ExtremalOptions { sample_dt: 0.01, ..ExtremalOptions::default() };
        let trajectory =
            simulate_extremal_with(gamma, psi0, p0, 6.0 * PI / s, &options).unwrap();
        assert!(trajectory.singular_halt.is_none(), "trial {trial} hit a singular halt");

        let h0 = trajectory.samples[0].hamiltonian;
        for sample in &trajectory.samples {
            h_drift_max = h_drift_max.max((sample.hamiltonian - h0).abs());
        }

        let complete: Vec<&ArcRecord> =
            trajectory.arcs.iter().filter(|arc| arc.ends_at_switch).collect();
        for arc in &complete {
            if arc.control == BangControl::X {
                x_gap_max = x_gap_max.max((arc.duration - PI / s).abs());
            }
        }
        let y_arcs: Vec<f64> = complete
            .iter()
            .filter(|arc| arc.control == BangControl::Y)
            .map(|arc| arc.duration)
            .collect();
        for pair in y_arcs.windows(2) {
            y_pair_worst = y_pair_worst.max((pair[0] + pair[1] - TWO_PI).abs());
            y_equal_worst = y_equal_worst.max((pair[0] - pair[1]).abs());
            y_pairs += 1;
        }

        small_phi_max = small_phi_max.max(longest_small_phi_interval(&trajectory, s));
    }

    let h_ok = h_drift_max <= 1e-9;
    let gap_ok = x_gap_max <= 1e-10;
    let pair_ok = y_pair_worst <= 1e-9;
    let isolation_ok = small_phi_max <= 1e-3;
    criterion(
        8,
        h_ok && gap_ok && pair_ok && isolation_ok,
        &format!(
            "extremal simulation over 50 runs: H drift {h_drift_max:.2e} (limit 1e-9, {}), \
             X-arc gap off pi/s by {x_gap_max:.2e} (limit 1e-10, {}), consecutive-Y pair sum off \
             2pi by {y_pair_worst:.2e} over {y_pairs} pairs (limit 1e-9, {}; equal-length \
             residual {y_equal_worst:.2e} — switch data repeats, so pairs sum to twice one arc, \
             not 2pi), |Phi| < 1e-10 interval max {small_phi_max:.2e} (limit 1e-3, {})",
            verdict(h_ok),
            verdict(gap_ok),
            verdict(pair_ok),
            verdict(isolation_ok),
        ),
    );
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "VIOLATED"
    }
}

/// 9. Endpoint structure: frozen u-component on local arcs, closed-form
/// decay on global arcs.
#[test]
fn criterion_09_endpoint_structure() {
    let mut rng = SplitMix64::new(0xace0_0009);
    let mut y_drift = 0.0f64;
    let mut x_deviation = 0.0f64;
    for _ in 0..20 {
        let gamma = rng.range(0.05, FRAC_PI_2 - 0.05);
        let report = endpoint_checks(gamma, 10.0).unwrap();
        y_drift = y_drift.max(report.y_drift_max);
        x_deviation = x_deviation.max(report.x_deviation_max);
    }
    let pass = y_drift <= 1e-13 && x_deviation <= 1e-10;
    criterion(
        9,
        pass,
        &format!(
            "endpoint structure: Y-arc u drift {y_drift:.2e} (limit 1e-13), X-arc u vs closed form \
             {x_deviation:.2e} on 1000-point grids to tau = 10 (limit 1e-10)"
        ),
    );
}

/// 10. Continuum optimality as stated: compare_patterns on the success
/// plane. Implemented faithfully; fails because the flow problem measured
/// against that plane has the pure-global quarter period as its optimum
/// (the three-step family's continuum shadow ends on the plane pulled back
/// through the final step's reflection, where the stated numbers do hold —
/// reported alongside for context).
#[test]
fn criterion_10_continuum_optimality() {
    let mut pass = true;
    let mut details = Vec::new();
    for block_count in [16.0f64, 64.0, 256.0] {
        let gamma = (1.0 / block_count.sqrt()).asin();
        let s = gamma.sin();
        let comparison = compare_patterns_on(gamma, 4, TerminalPlane::Direct).unwrap();
        let formula = PI / (2.0 * s)
            - 2.0 * (optimal_eta(block_count).unwrap() - optimal_alpha(block_count).unwrap());

        let xyx = comparison
            .rows
            .iter()
            .find(|row| pattern_string(&row.requested) == "XYX")
            .expect("three-arc row exists");
        let strict_minimizer = comparison
            .rows
            .iter()
            .filter(|row| row.requested.len() >= 2 && pattern_string(&row.requested) != "XYX")
            .all(|row| xyx.total_time < row.total_time - 1e-9);
        let total_matches = (xyx.total_time - formula).abs() <= 5e-2;
        let gap = TWO_PI.min(TWO_PI / s) - 1e-6;
        let gaps_hold = comparison
            .rows
            .iter()
            .filter(|row| row.requested.len() >= 4)
            .all(|row| row.total_time >= xyx.total_time + gap);

        // Context: the same comparison against the reflected plane.
        let reflected = compare_patterns_on(gamma, 4, TerminalPlane::Reflected).unwrap();
        let reflected_xyx = reflected
            .rows
            .iter()
            .find(|row| pattern_string(&row.requested) == "XYX")
            .expect("three-arc row exists");

        pass &= strict_minimizer && total_matches && gaps_hold;
        details.push(format!(
            "K={block_count}: XYX total {:.4} vs formula {formula:.4} (match {}), strict \
             minimizer {}, >=3-switch gaps {}; reflected-plane XYX total {:.4} (off formula by \
             {:.1e}, pruned {})",
            xyx.total_time,
            verdict(total_matches),
            verdict(strict_minimizer),
            verdict(gaps_hold),
            reflected_xyx.total_time,
            (reflected_xyx.total_time - formula).abs(),
            pattern_string(&reflected_xyx.schedule.pattern),
        ));
    }
    criterion(10, pass, &format!("continuum optimality on the success plane: {}", details.join(" | ")));
}

/// 11. Compression ledger arithmetic.
#[test]
fn criterion_11_compression_arithmetic() {
    let mut rng = SplitMix64::new(0xace0_0011);
    let mut yxy_worst = 0.0f64;
    let mut xyx_worst = 0.0f64;
    for _ in 0..50 {
        let gamma = rng.range(0.05, FRAC_PI_2 - 0.05);
        let y_length = rng.range(1e-6, TWO_PI - 1e-6);
        let report = compression_report(gamma, y_length).unwrap();
        yxy_worst = yxy_worst.max((report.yxy_gap - TWO_PI).abs());
        xyx_worst = xyx_worst.max((report.xyx_gap - TWO_PI / gamma.sin()).abs());
    }
    let pass = yxy_worst <= 1e-12 && xyx_worst <= 1e-12;
    criterion(
        11,
        pass,
        &format!(
            "compression arithmetic: |yxy gap - 2pi| {yxy_worst:.2e}, |xyx gap - 2pi/s| \
             {xyx_worst:.2e} over 50 samples (limit 1e-12)"
        ),
    );
}

/// Companion check (not a numbered criterion): the pattern comparison on
/// the reflected plane keeps the local stage and reproduces the closed-form
/// totals, quantifying where the three-step family's advantage lives.
#[test]
fn reflected_plane_reproduces_the_family_totals() {
    for block_count in [16.0f64, 64.0, 256.0] {
        let gamma = (1.0 / block_count.sqrt()).asin();
        let comparison = compare_patterns_on(gamma, 2, TerminalPlane::Reflected).unwrap();
        let best = comparison.best();
        let predicted = continuum_grk_schedule(block_count).unwrap().total_time;
        assert!(
            (best.total_time - predicted).abs() <= 5e-2,
            "K={block_count}: {} vs {predicted}",
            best.total_time
        );
        assert!(
            pattern_string(&best.schedule.pattern).starts_with("XY"),
            "K={block_count}: pruned {}",
            pattern_string(&best.schedule.pattern)
        );
    }
}
