//! Full `2^n`-dimensional statevector simulation of the oracle and diffusion
//! steps, used as the brute-force check on the three-dimensional reduction.
//!
//! Diffusion is applied as a rank-one update (`2 <s|psi> s - psi`), so one
//! letter costs `O(2^n)` instead of `O(4^n)`. The reduced-basis embedding is
//! rebuilt from `(n, m, target)` on every call; this layer favors simplicity
//! over speed.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::max_abs_diff3;
use crate::math;
use crate::reduced::{
    apply_word_incremental, initial_state, DatabaseGeometry, GeometryError, Letter, OperatorWord,
};

/// Default cap on the address bit count (8 MB of amplitudes).
pub const DEFAULT_BIT_CAP: u32 = 20;

/// Dense real statevector over all `2^n` addresses.
#[derive(Clone, Debug)]
pub struct FullState {
    pub amplitudes: Vec<f64>,
    pub n: u32,
    pub target: u64,
}

impl FullState {
    pub fn norm(&self) -> f64 {
        math::sqrt(self.amplitudes.iter().map(|a| a * a).sum())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleError {
    Geometry(GeometryError),
    /// `n` exceeds the configured statevector cap.
    BitCapExceeded { n: u32, cap: u32 },
    TargetOutOfRange { target: u64, item_count: u64 },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::Geometry(e) => write!(f, "{e}"),
            OracleError::BitCapExceeded { n, cap } => {
                write!(f, "bit count n={n} exceeds the statevector cap {cap}")
            }
            OracleError::TargetOutOfRange { target, item_count } => {
                write!(f, "target {target} outside [0, {item_count})")
            }
        }
    }
}

impl core::error::Error for OracleError {}

impl From<GeometryError> for OracleError {
    fn from(e: GeometryError) -> Self {
        OracleError::Geometry(e)
    }
}

/// Flips the sign of the target amplitude.
fn apply_oracle(state: &mut [f64], target: u64) {
    state[target as usize] = -state[target as usize];
}

/// Whole-database diffusion: reflection about the uniform superposition.
fn apply_global_diffusion(state: &mut [f64]) {
    let twice_mean = 2.0 * state.iter().sum::<f64>() / state.len() as f64;
    for a in state.iter_mut() {
        *a = twice_mean - *a;
    }
}

/// Per-block diffusion: reflection about each block's uniform superposition.
fn apply_local_diffusion(state: &mut [f64], block_size: usize) {
    for block in state.chunks_mut(block_size) {
        let twice_mean = 2.0 * block.iter().sum::<f64>() / block_size as f64;
        for a in block.iter_mut() {
            *a = twice_mean - *a;
        }
    }
}

fn apply_letter(state: &mut [f64], target: u64, block_size: usize, letter: Letter) {
    apply_oracle(state, target);
    match letter {
        Letter::Global => apply_global_diffusion(state),
        Letter::Local => apply_local_diffusion(state, block_size),
    }
}

fn check_inputs(n: u32, m: u32, target: u64, cap: u32) -> Result<DatabaseGeometry, OracleError> {
    if n > cap {
        return Err(OracleError::BitCapExceeded { n, cap });
    }
    let geom = DatabaseGeometry::new(n, m)?;
    if target >= geom.item_count {
        return Err(OracleError::TargetOutOfRange { target, item_count: geom.item_count });
    }
    Ok(geom)
}

/// Runs the word on the uniform superposition in the full space, applying
/// the oracle followed by the matching diffusion for each letter.
pub fn simulate_full(n: u32, m: u32, target: u64, word: &OperatorWord) -> Result<FullState, OracleError> {
    simulate_full_capped(n, m, target, word, DEFAULT_BIT_CAP)
}

pub fn simulate_full_capped(
    n: u32,
    m: u32,
    target: u64,
    word: &OperatorWord,
    cap: u32,
) -> Result<FullState, OracleError> {
    let geom = check_inputs(n, m, target, cap)?;
    let item_count = geom.item_count as usize;
    let block_size = geom.block_size as usize;
    let mut amplitudes = vec![1.0 / math::sqrt(item_count as f64); item_count];
    for &letter in word.letters() {
        apply_letter(&mut amplitudes, target, block_size, letter);
    }
    Ok(FullState { amplitudes, n, target })
}

/// Orthonormal embedding of the reduced basis `(|t>, |ntt>, |u>)` into the
/// full space for a given target.
#[derive(Clone, Debug)]
pub struct ReducedEmbedding {
    pub target_vector: Vec<f64>,
    pub block_rest_vector: Vec<f64>,
    pub outside_vector: Vec<f64>,
}

impl ReducedEmbedding {
    /// Blocks are labeled by the high `n - m` address bits, so the target's
    /// block spans addresses `[block_start, block_start + block_size)`.
    pub fn new(geom: &DatabaseGeometry, target: u64) -> Self {
        let item_count = geom.item_count as usize;
        let block_size = geom.block_size as usize;
        let block_start = (target as usize / block_size) * block_size;

        let mut target_vector = vec![0.0; item_count];
        target_vector[target as usize] = 1.0;

        let mut block_rest_vector = vec![0.0; item_count];
        let rest_amp = 1.0 / math::sqrt((block_size - 1) as f64);
        for x in block_start..block_start + block_size {
            if x != target as usize {
                block_rest_vector[x] = rest_amp;
            }
        }

        let mut outside_vector = vec![0.0; item_count];
        let outside_amp = 1.0 / math::sqrt((item_count - block_size) as f64);
        for (x, a) in outside_vector.iter_mut().enumerate() {
            if x < block_start || x >= block_start + block_size {
                *a = outside_amp;
            }
        }

        ReducedEmbedding { target_vector, block_rest_vector, outside_vector }
    }

    /// Reduced coordinates of a full state.
    pub fn project(&self, state: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, basis) in
            [&self.target_vector, &self.block_rest_vector, &self.outside_vector].iter().enumerate()
        {
            out[i] = basis.iter().zip(state).map(|(b, a)| b * a).sum();
        }
        out
    }

    /// Norm of the full state's component outside the embedded span,
    /// computed from the explicit residual vector. (The Pythagorean form
    /// `sqrt(|psi|^2 - |coords|^2)` cancels catastrophically and cannot
    /// resolve leakage below ~1e-8.)
    pub fn leakage(&self, state: &[f64]) -> f64 {
        let coords = self.project(state);
        let mut sum = 0.0;
        for (x, ((t, r), o)) in state.iter().zip(
            self.target_vector
                .iter()
                .zip(&self.block_rest_vector)
                .zip(&self.outside_vector),
        ) {
            let outside = x - coords[0] * t - coords[1] * r - coords[2] * o;
            sum += outside * outside;
        }
        math::sqrt(sum)
    }
}

/// Outcome of running the full and reduced simulations in lockstep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonReport {
    /// Max absolute difference, over every prefix of the word, between the
    /// projected full state and the reduced trajectory.
    pub deviation: f64,
    /// Max norm, over every prefix, of the full state outside the embedding.
    pub leakage: f64,
}

/// Checks subspace invariance: projects the full trajectory onto the
/// embedding after every letter and compares with the reduced trajectory.
pub fn compare_with_reduced(
    n: u32,
    m: u32,
    target: u64,
    word: &OperatorWord,
) -> Result<ComparisonReport, OracleError> {
    compare_with_reduced_capped(n, m, target, word, DEFAULT_BIT_CAP)
}

pub fn compare_with_reduced_capped(
    n: u32,
    m: u32,
    target: u64,
    word: &OperatorWord,
    cap: u32,
) -> Result<ComparisonReport, OracleError> {
    let geom = check_inputs(n, m, target, cap)?;
    let embedding = ReducedEmbedding::new(&geom, target);
    let item_count = geom.item_count as usize;
    let block_size = geom.block_size as usize;

    let mut full = vec![1.0 / math::sqrt(item_count as f64); item_count];
    let mut reduced = initial_state(&geom);
    let mut deviation = max_abs_diff3(&embedding.project(&full), &reduced.components);
    let mut leakage = embedding.leakage(&full);

    let stepper = apply_word_incremental(&geom);
    for &letter in word.letters() {
        apply_letter(&mut full, target, block_size, letter);
        reduced = stepper.step(letter, &reduced);
        deviation = math::fmax(deviation, max_abs_diff3(&embedding.project(&full), &reduced.components));
        leakage = math::fmax(leakage, embedding.leakage(&full));
    }
    Ok(ComparisonReport { deviation, leakage })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced::{apply_word, global_grover};
    use crate::rng::SplitMix64;

    fn random_word(rng: &mut SplitMix64, max_len: u64) -> OperatorWord {
        let len = rng.below(max_len + 1) as usize;
        let mut letters = Vec::with_capacity(len);
        for _ in 0..len {
            letters.push(if rng.next_u64() & 1 == 0 { Letter::Global } else { Letter::Local });
        }
        OperatorWord::from_letters(letters)
    }

    #[test]
    fn empty_word_is_uniform() {
        let state = simulate_full(3, 1, 5, &OperatorWord::new()).unwrap();
        for &a in &state.amplitudes {
            assert!((a - 1.0 / 8f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            simulate_full(25, 3, 0, &OperatorWord::new()),
            Err(OracleError::BitCapExceeded { .. })
        ));
        assert!(matches!(
            simulate_full(3, 1, 8, &OperatorWord::new()),
            Err(OracleError::TargetOutOfRange { .. })
        ));
        assert!(simulate_full_capped(10, 5, 0, &OperatorWord::new(), 9).is_err());
    }

    #[test]
    fn single_global_matches_dense_algebra() {
        // Independent route: dense 4x4 matrices multiplied by hand-rolled
        // loops, no rank-one shortcut.
        let n = 2u32;
        let target = 3usize;
        let dim = 4usize;
        let mut oracle = [[0.0f64; 4]; 4];
        let mut diffusion = [[0.0f64; 4]; 4];
        for i in 0..dim {
            for j in 0..dim {
                oracle[i][j] = if i == j { 1.0 } else { 0.0 };
                diffusion[i][j] = 2.0 / dim as f64 - if i == j { 1.0 } else { 0.0 };
            }
        }
        oracle[target][target] = -1.0;
        let uniform = [0.5f64; 4];
        let mut after_oracle = [0.0f64; 4];
        for i in 0..dim {
            for j in 0..dim {
                after_oracle[i] += oracle[i][j] * uniform[j];
            }
        }
        let mut expected = [0.0f64; 4];
        for i in 0..dim {
            for j in 0..dim {
                expected[i] += diffusion[i][j] * after_oracle[j];
            }
        }

        let word: OperatorWord = "G".parse().unwrap();
        let state = simulate_full(n, 1, target as u64, &word).unwrap();
        for i in 0..dim {
            assert!((state.amplitudes[i] - expected[i]).abs() < 1e-14, "i={i}");
        }
    }

    #[test]
    fn norm_preserved_along_words() {
        let mut rng = SplitMix64::new(17);
        for _ in 0..10 {
            let word = random_word(&mut rng, 60);
            let state = simulate_full(6, 2, rng.below(64), &word).unwrap();
            assert!((state.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn embedding_is_orthonormal_with_expected_support() {
        let geom = DatabaseGeometry::new(5, 2).unwrap();
        let target = 13u64;
        let e = ReducedEmbedding::new(&geom, target);
        let vectors = [&e.target_vector, &e.block_rest_vector, &e.outside_vector];
        for i in 0..3 {
            for j in 0..3 {
                let d: f64 = vectors[i].iter().zip(vectors[j]).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-12, "({i},{j})");
            }
        }
        // target 13 = block 3 of size 4 -> addresses 12..16
        for x in 0..32usize {
            let in_block = (12..16).contains(&x);
            if x == 13 {
                assert_eq!(e.target_vector[x], 1.0);
                assert_eq!(e.block_rest_vector[x], 0.0);
            }
            if in_block {
                assert_eq!(e.outside_vector[x], 0.0);
            } else {
                assert_eq!(e.block_rest_vector[x], 0.0);
                assert!(e.outside_vector[x] > 0.0);
            }
        }
    }

    #[test]
    fn empty_word_has_no_deviation_or_leakage() {
        let report = compare_with_reduced(4, 2, 7, &OperatorWord::new()).unwrap();
        assert!(report.deviation < 1e-12);
        assert!(report.leakage < 1e-12);
    }

    #[test]
    fn random_words_stay_in_subspace() {
        let mut rng = SplitMix64::new(23);
        for _ in 0..5 {
            let word = random_word(&mut rng, 50);
            let target = rng.below(64);
            let report = compare_with_reduced(6, 3, target, &word).unwrap();
            assert!(report.deviation <= 1e-10, "deviation {}", report.deviation);
            assert!(report.leakage <= 1e-10, "leakage {}", report.leakage);
        }
    }

    #[test]
    fn reduced_trajectory_is_target_independent() {
        // Same word, every target in the database: identical reduced picture.
        let mut rng = SplitMix64::new(31);
        let word = random_word(&mut rng, 30);
        for m in 1..4 {
            for target in 0..16 {
                let report = compare_with_reduced(4, m, target, &word).unwrap();
                assert!(report.deviation <= 1e-10, "m={m} target={target}");
                assert!(report.leakage <= 1e-10, "m={m} target={target}");
            }
        }
    }

    #[test]
    fn double_global_matches_reduced_square() {
        let geom = DatabaseGeometry::new(5, 2).unwrap();
        let op = global_grover(&geom);
        let squared = op.matrix.mul(&op.matrix);
        let predicted = squared.mul_vec(&initial_state(&geom).components);

        let word: OperatorWord = "GG".parse().unwrap();
        let full = simulate_full(5, 2, 9, &word).unwrap();
        let embedding = ReducedEmbedding::new(&geom, 9);
        let projected = embedding.project(&full.amplitudes);
        assert!((projected[2] - predicted[2]).abs() < 1e-10);

        let via_word = apply_word(&geom, &word, &initial_state(&geom));
        assert!(crate::linalg::max_abs_diff3(&via_word.components, &predicted) < 1e-12);
    }
}
