//! Exact discrete partial-search dynamics in the three-dimensional invariant
//! subspace spanned by the target state, the non-target states of the target
//! block, and the non-target blocks (ordered basis `(|t>, |ntt>, |u>)`).
//!
//! All amplitudes are real: both diffusion operators are real orthogonal in
//! this basis. Every function is pure; all types are immutable values.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{norm, Mat3, Vec3};
use crate::math;

/// Runs longer than this are applied as a matrix power instead of
/// letter-by-letter; equality of the two routes is a tested invariant.
const RUN_POW_THRESHOLD: u32 = 16;

/// Norm drift beyond this triggers renormalization with a logged warning.
const RENORM_TOLERANCE: f64 = 1e-8;

/// One discrete control letter: a global or a block-local amplification step
/// (each letter costs one oracle query).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    Global,
    Local,
}

impl Letter {
    pub fn symbol(self) -> char {
        match self {
            Letter::Global => 'G',
            Letter::Local => 'L',
        }
    }
}

/// Finite sequence over `{Global, Local}`, read left to right in application
/// order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OperatorWord {
    letters: Vec<Letter>,
}

impl OperatorWord {
    pub fn new() -> Self {
        OperatorWord { letters: Vec::new() }
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        OperatorWord { letters }
    }

    /// Builds the word from run-length encoding; runs with a zero count are
    /// rejected by debug assertion (counts must be >= 1).
    pub fn from_runs(runs: &[(Letter, u32)]) -> Self {
        let mut letters = Vec::new();
        for &(letter, count) in runs {
            debug_assert!(count >= 1, "run counts must be >= 1");
            for _ in 0..count {
                letters.push(letter);
            }
        }
        OperatorWord { letters }
    }

    /// The canonical three-step word: `count1` globals, `count2` locals, one
    /// final global.
    pub fn global_local_global(count1: u32, count2: u32) -> Self {
        let mut runs = Vec::new();
        if count1 > 0 {
            runs.push((Letter::Global, count1));
        }
        if count2 > 0 {
            runs.push((Letter::Local, count2));
        }
        runs.push((Letter::Global, 1));
        OperatorWord::from_runs(&runs)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Run-length encoding; concatenating the runs reproduces the letters.
    pub fn runs(&self) -> Vec<(Letter, u32)> {
        let mut runs: Vec<(Letter, u32)> = Vec::new();
        for &letter in &self.letters {
            match runs.last_mut() {
                Some((last, count)) if *last == letter => *count += 1,
                _ => runs.push((letter, 1)),
            }
        }
        runs
    }

    /// Number of letter changes (runs minus one; zero for the empty word).
    pub fn switching_count(&self) -> usize {
        self.runs().len().saturating_sub(1)
    }
}

impl fmt::Display for OperatorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &letter in &self.letters {
            write!(f, "{}", letter.symbol())?;
        }
        Ok(())
    }
}

impl core::str::FromStr for OperatorWord {
    type Err = WordParseError;

    fn from_str(s: &str) -> Result<Self, WordParseError> {
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                'G' | 'g' => letters.push(Letter::Global),
                'L' | 'l' => letters.push(Letter::Local),
                _ => return Err(WordParseError { offending: c }),
            }
        }
        Ok(OperatorWord { letters })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WordParseError {
    pub offending: char,
}

impl fmt::Display for WordParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid word letter {:?} (expected G or L)", self.offending)
    }
}

impl core::error::Error for WordParseError {}

/// Database partition sizes and the derived angles.
///
/// `n` address bits split into a block label of `n - m` bits and a
/// within-block address of `m` bits, so the `item_count = 2^n` database has
/// `block_count = 2^(n-m)` blocks of `block_size = 2^m` items. The angles
/// satisfy `sin(theta1) = 1/sqrt(item_count)`, `sin(theta2) =
/// 1/sqrt(block_size)`, `sin(gamma) = 1/sqrt(block_count)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DatabaseGeometry {
    pub n: u32,
    pub m: u32,
    pub item_count: u64,
    pub block_size: u64,
    pub block_count: u64,
    pub theta1: f64,
    pub theta2: f64,
    pub gamma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeometryError {
    /// `m` must satisfy `1 <= m < n`; otherwise the partition is degenerate.
    DegeneratePartition { n: u32, m: u32 },
    /// Bit counts above 62 overflow the u64 item count.
    TooLarge { n: u32 },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::DegeneratePartition { n, m } => {
                write!(f, "degenerate partition: need 1 <= m < n, got n={n}, m={m}")
            }
            GeometryError::TooLarge { n } => write!(f, "bit count n={n} exceeds 62"),
        }
    }
}

impl core::error::Error for GeometryError {}

impl DatabaseGeometry {
    /// Angles are stored as inverse sines of the exact `1/sqrt(count)`
    /// values; every matrix entry downstream is built from sin/cos of these
    /// angles rather than re-derived radicals.
    pub fn new(n: u32, m: u32) -> Result<Self, GeometryError> {
        if m < 1 || m >= n {
            return Err(GeometryError::DegeneratePartition { n, m });
        }
        if n > 62 {
            return Err(GeometryError::TooLarge { n });
        }
        let item_count = 1u64 << n;
        let block_size = 1u64 << m;
        let block_count = 1u64 << (n - m);
        Ok(DatabaseGeometry {
            n,
            m,
            item_count,
            block_size,
            block_count,
            theta1: math::asin(1.0 / math::sqrt(item_count as f64)),
            theta2: math::asin(1.0 / math::sqrt(block_size as f64)),
            gamma: math::asin(1.0 / math::sqrt(block_count as f64)),
        })
    }

    pub fn sin_gamma(&self) -> f64 {
        math::sin(self.gamma)
    }

    pub fn cos_gamma(&self) -> f64 {
        math::cos(self.gamma)
    }

    pub fn sin_theta2(&self) -> f64 {
        math::sin(self.theta2)
    }

    pub fn cos_theta2(&self) -> f64 {
        math::cos(self.theta2)
    }
}

/// Real amplitude 3-vector in the ordered basis `(|t>, |ntt>, |u>)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedState {
    pub components: Vec3,
}

impl ReducedState {
    pub fn new(components: Vec3) -> Self {
        ReducedState { components }
    }

    pub fn norm(&self) -> f64 {
        norm(&self.components)
    }

    /// Amplitude on the target state.
    pub fn target_amplitude(&self) -> f64 {
        self.components[0]
    }

    /// Amplitude on the non-target blocks; zero means the state lies on the
    /// terminal plane.
    pub fn residual_amplitude(&self) -> f64 {
        self.components[2]
    }

    /// Probability of measuring the target block: `1 - c_u^2`.
    pub fn target_block_probability(&self) -> f64 {
        1.0 - self.components[2] * self.components[2]
    }

    /// Residual probability `c_u^2`, the quantity minimized by parameter
    /// refinement and word search.
    pub fn residual_probability(&self) -> f64 {
        self.components[2] * self.components[2]
    }

    pub fn renormalized(&self) -> Self {
        let n = self.norm();
        ReducedState::new(crate::linalg::scale(&self.components, 1.0 / n))
    }
}

/// Orthogonal 3x3 operator acting on reduced states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedOperator {
    pub matrix: Mat3,
}

impl ReducedOperator {
    pub fn apply(&self, state: &ReducedState) -> ReducedState {
        ReducedState::new(self.matrix.mul_vec(&state.components))
    }

    pub fn det(&self) -> f64 {
        self.matrix.det()
    }

    pub fn orthogonality_defect(&self) -> f64 {
        self.matrix.orthogonality_defect()
    }
}

/// Reduced form of the global amplification step (oracle followed by the
/// whole-database diffusion). Determinant -1.
pub fn global_grover(geom: &DatabaseGeometry) -> ReducedOperator {
    let sg = geom.sin_gamma();
    let cg = geom.cos_gamma();
    let st = geom.sin_theta2();
    let ct = geom.cos_theta2();
    ReducedOperator {
        matrix: Mat3([
            [
                1.0 - 2.0 * sg * sg * st * st,
                2.0 * sg * sg * st * ct,
                2.0 * sg * cg * st,
            ],
            [
                -2.0 * sg * sg * st * ct,
                2.0 * sg * sg * ct * ct - 1.0,
                2.0 * sg * cg * ct,
            ],
            [-2.0 * sg * cg * st, 2.0 * sg * cg * ct, 2.0 * cg * cg - 1.0],
        ]),
    }
}

/// Reduced form of the block-local amplification step: a rotation by
/// `2*theta2` in the `(t, ntt)` plane; the `u` component is untouched.
pub fn local_grover(geom: &DatabaseGeometry) -> ReducedOperator {
    let c = math::cos(2.0 * geom.theta2);
    let s = math::sin(2.0 * geom.theta2);
    ReducedOperator {
        matrix: Mat3([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]]),
    }
}

/// The uniform superposition in reduced coordinates:
/// `(sin(gamma) sin(theta2), sin(gamma) cos(theta2), cos(gamma))`.
pub fn initial_state(geom: &DatabaseGeometry) -> ReducedState {
    let sg = geom.sin_gamma();
    ReducedState::new([sg * geom.sin_theta2(), sg * geom.cos_theta2(), geom.cos_gamma()])
}

/// Residual amplitude `c_u` of a state (see also
/// [`ReducedState::target_block_probability`]).
pub fn residual_amplitude(state: &ReducedState) -> f64 {
    state.residual_amplitude()
}

/// Applies a word to a state, letter by letter in word order.
///
/// Long runs go through exponentiation by squaring of the run's operator.
/// Norm drift above `1e-8` is renormalized with a warning, never silently.
pub fn apply_word(
    geom: &DatabaseGeometry,
    word: &OperatorWord,
    state: &ReducedState,
) -> ReducedState {
    let global = global_grover(geom);
    let local = local_grover(geom);
    let mut current = *state;
    for (letter, count) in word.runs() {
        let op = match letter {
            Letter::Global => &global,
            Letter::Local => &local,
        };
        if count > RUN_POW_THRESHOLD {
            current = ReducedState::new(op.matrix.pow(count as u64).mul_vec(&current.components));
        } else {
            for _ in 0..count {
                current = op.apply(&current);
            }
        }
        let drift = math::abs(current.norm() - 1.0);
        if drift > RENORM_TOLERANCE {
            log::warn!(
                "reduced state norm drifted by {drift:.3e} after {count} x {:?}; renormalizing",
                letter
            );
            current = current.renormalized();
        }
    }
    current
}

/// Letter-at-a-time application with the two operators built once.
pub struct WordStepper {
    global: ReducedOperator,
    local: ReducedOperator,
}

impl WordStepper {
    pub fn operator(&self, letter: Letter) -> &ReducedOperator {
        match letter {
            Letter::Global => &self.global,
            Letter::Local => &self.local,
        }
    }

    pub fn step(&self, letter: Letter, state: &ReducedState) -> ReducedState {
        self.operator(letter).apply(state)
    }
}

pub fn apply_word_incremental(geom: &DatabaseGeometry) -> WordStepper {
    WordStepper { global: global_grover(geom), local: local_grover(geom) }
}

/// Formats a word as its run pattern, e.g. `G^3 L^2 G`.
pub fn run_pattern_string(word: &OperatorWord) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (i, (letter, count)) in word.runs().iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        if *count == 1 {
            let _ = write!(out, "{}", letter.symbol());
        } else {
            let _ = write!(out, "{}^{}", letter.symbol(), count);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    const F64_TOL: f64 = 1e-12;

    #[test]
    fn geometry_6_3() {
        let g = DatabaseGeometry::new(6, 3).unwrap();
        assert_eq!(g.item_count, 64);
        assert_eq!(g.block_size, 8);
        assert_eq!(g.block_count, 8);
        assert!((g.sin_gamma() - 1.0 / 8f64.sqrt()).abs() < F64_TOL);
    }

    #[test]
    fn geometry_2_1() {
        let g = DatabaseGeometry::new(2, 1).unwrap();
        assert_eq!(g.item_count, 4);
        assert_eq!(g.block_size, 2);
        assert_eq!(g.block_count, 2);
        assert!((g.sin_theta2() - 1.0 / 2f64.sqrt()).abs() < F64_TOL);
    }

    #[test]
    fn geometry_rejects_degenerate() {
        assert!(DatabaseGeometry::new(3, 3).is_err());
        assert!(DatabaseGeometry::new(3, 0).is_err());
        assert!(DatabaseGeometry::new(2, 5).is_err());
    }

    #[test]
    fn global_operator_shape() {
        // Determinant -1 and orthogonality for a sweep of geometries.
        for (n, m) in [(2, 1), (4, 2), (6, 3), (8, 5), (10, 3)] {
            let g = DatabaseGeometry::new(n, m).unwrap();
            let op = global_grover(&g);
            assert!((op.det() + 1.0).abs() < F64_TOL, "(n,m)=({n},{m})");
            assert!(op.orthogonality_defect() < F64_TOL, "(n,m)=({n},{m})");
        }
    }

    #[test]
    fn global_corner_entry_vanishes_at_k2() {
        // For block_count = 2, the (u,u) entry is 2cos^2(gamma) - 1 = 0.
        let g = DatabaseGeometry::new(2, 1).unwrap();
        let op = global_grover(&g);
        assert!(op.matrix.0[2][2].abs() < F64_TOL);
    }

    #[test]
    fn local_operator_shape() {
        for (n, m) in [(2, 1), (6, 3), (9, 4)] {
            let g = DatabaseGeometry::new(n, m).unwrap();
            let op = local_grover(&g);
            assert!((op.det() - 1.0).abs() < F64_TOL);
            assert!(op.orthogonality_defect() < F64_TOL);
            assert_eq!(op.matrix.0[2][2], 1.0);
            assert_eq!(op.matrix.0[2][0], 0.0);
            assert_eq!(op.matrix.0[2][1], 0.0);
            assert_eq!(op.matrix.0[0][2], 0.0);
            assert_eq!(op.matrix.0[1][2], 0.0);
        }
    }

    #[test]
    fn local_2_1_is_quarter_turn() {
        let g = DatabaseGeometry::new(2, 1).unwrap();
        let op = local_grover(&g);
        let expected = Mat3([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(op.matrix.max_abs_diff(&expected) < F64_TOL);
    }

    #[test]
    fn initial_state_6_3() {
        let g = DatabaseGeometry::new(6, 3).unwrap();
        let psi = initial_state(&g);
        assert!((psi.components[0] - 0.125).abs() < F64_TOL);
        assert!((psi.components[1] - 7f64.sqrt() / 8.0).abs() < F64_TOL);
        assert!((psi.components[2] - (7.0f64 / 8.0).sqrt()).abs() < F64_TOL);
        assert!((psi.norm() - 1.0).abs() < F64_TOL);
    }

    #[test]
    fn initial_target_amplitude_is_inverse_sqrt_count() {
        for (n, m) in [(2, 1), (6, 3), (10, 7), (16, 8)] {
            let g = DatabaseGeometry::new(n, m).unwrap();
            let psi = initial_state(&g);
            let expected = 1.0 / (g.item_count as f64).sqrt();
            assert!((psi.components[0] - expected).abs() < F64_TOL);
            assert!((psi.norm() - 1.0).abs() < F64_TOL);
        }
    }

    #[test]
    fn empty_word_is_identity() {
        let g = DatabaseGeometry::new(4, 2).unwrap();
        let psi = initial_state(&g);
        let out = apply_word(&g, &OperatorWord::new(), &psi);
        assert_eq!(out, psi);
    }

    #[test]
    fn single_local_on_2_1() {
        // Multiplying (1/2, 1/2, 1/sqrt 2) by the quarter-turn local operator.
        let g = DatabaseGeometry::new(2, 1).unwrap();
        let psi = ReducedState::new([0.5, 0.5, 1.0 / 2f64.sqrt()]);
        let word: OperatorWord = "L".parse().unwrap();
        let out = apply_word(&g, &word, &psi);
        assert!((out.components[0] - 0.5).abs() < F64_TOL);
        assert!((out.components[1] + 0.5).abs() < F64_TOL);
        assert!((out.components[2] - 1.0 / 2f64.sqrt()).abs() < F64_TOL);
    }

    #[test]
    fn local_fixes_residual_amplitude_exactly() {
        let g = DatabaseGeometry::new(8, 4).unwrap();
        let op = local_grover(&g);
        let mut rng = SplitMix64::new(11);
        for _ in 0..50 {
            let v = [rng.range(-1.0, 1.0), rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)];
            let out = op.apply(&ReducedState::new(v));
            assert_eq!(out.components[2], v[2]);
        }
    }

    #[test]
    fn long_words_preserve_norm() {
        let g = DatabaseGeometry::new(8, 4).unwrap();
        let psi = initial_state(&g);
        let mut rng = SplitMix64::new(3);
        let mut letters = Vec::new();
        for _ in 0..10_000 {
            letters.push(if rng.next_u64() & 1 == 0 { Letter::Global } else { Letter::Local });
        }
        let out = apply_word(&g, &OperatorWord::from_letters(letters), &psi);
        assert!((out.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn run_power_matches_letter_by_letter() {
        // Same word applied through the run-length fast path and naively.
        let g = DatabaseGeometry::new(6, 3).unwrap();
        let psi = initial_state(&g);
        let word = OperatorWord::from_runs(&[
            (Letter::Global, 40),
            (Letter::Local, 23),
            (Letter::Global, 1),
            (Letter::Local, 64),
        ]);
        let fast = apply_word(&g, &word, &psi);

        let global = global_grover(&g);
        let local = local_grover(&g);
        let mut slow = psi;
        for &letter in word.letters() {
            slow = match letter {
                Letter::Global => global.apply(&slow),
                Letter::Local => local.apply(&slow),
            };
        }
        assert!(crate::linalg::max_abs_diff3(&fast.components, &slow.components) < 1e-10);
    }

    #[test]
    fn runs_round_trip() {
        let mut rng = SplitMix64::new(9);
        for _ in 0..200 {
            let len = rng.below(40) as usize;
            let mut letters = Vec::new();
            for _ in 0..len {
                letters.push(if rng.next_u64() & 1 == 0 { Letter::Global } else { Letter::Local });
            }
            let word = OperatorWord::from_letters(letters.clone());
            let rebuilt = OperatorWord::from_runs(&word.runs());
            assert_eq!(rebuilt.letters(), &letters[..]);
            for (_, count) in word.runs() {
                assert!(count >= 1);
            }
        }
    }

    #[test]
    fn residual_reads_u_component() {
        let g = DatabaseGeometry::new(6, 3).unwrap();
        let psi = initial_state(&g);
        assert!((residual_amplitude(&psi) - (7.0f64 / 8.0).sqrt()).abs() < F64_TOL);
        let on_plane = ReducedState::new([0.6, 0.8, 0.0]);
        assert_eq!(residual_amplitude(&on_plane), 0.0);
        assert!((on_plane.target_block_probability() - 1.0).abs() < F64_TOL);
        let p = psi.target_block_probability();
        assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn word_parse_and_display() {
        let word: OperatorWord = "GGLLG".parse().unwrap();
        assert_eq!(word.len(), 5);
        assert_eq!(alloc::format!("{word}"), "GGLLG");
        assert_eq!(run_pattern_string(&word), "G^2 L^2 G");
        assert!("GXL".parse::<OperatorWord>().is_err());
    }
}
