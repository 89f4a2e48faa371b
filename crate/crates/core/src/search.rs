//! Exhaustive and structured enumeration over operator words: the discrete,
//! desk-scale counterpart of the structural optimality question.
//!
//! The search runs in two phases. Words shorter than the partition prefix
//! length are enumerated by one depth-first pass; longer words are split
//! into `2^PARTITION_PREFIX_LEN` independent subtrees keyed by their first
//! letters. Each partition explores with only its own local cutoff and
//! returns its local best, and the merge applies the global tie-break, so
//! the report is identical no matter how many workers run partitions or in
//! what order they finish. Prefix states are cached only along the active
//! path, keeping memory linear in the word length.

use alloc::vec::Vec;
use core::fmt;

use crate::reduced::{
    apply_word_incremental, initial_state, DatabaseGeometry, Letter, OperatorWord, ReducedState,
};

/// Words longer than this split into parallel subtrees keyed by the prefix.
pub const PARTITION_PREFIX_LEN: u32 = 8;

/// Default examination budget: `2^27` words, which admits `max_len = 26`.
pub const DEFAULT_WORD_BUDGET: u64 = 1 << 27;

/// Residual-probability success threshold default.
pub const DEFAULT_EPSILON: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchBudget {
    pub max_words: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_words: DEFAULT_WORD_BUDGET }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SearchError {
    /// The full enumeration would evaluate more words than the budget
    /// allows; the estimate is returned so callers can raise it knowingly.
    BudgetExceeded { required_words: u64, max_words: u64 },
}

impl fmt::Display for SearchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SearchError::BudgetExceeded { required_words, max_words } => write!(
                f,
                "search needs ~{required_words} word evaluations, budget allows {max_words}; \
                 raise the budget to proceed"
            ),
        }
    }
}

impl core::error::Error for SearchError {}

/// A successful word with the fields the tie-break orders by.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub word: OperatorWord,
    pub residual_probability: f64,
}

impl Candidate {
    /// Shorter first, then fewer runs, then lexicographic with Global < Local.
    fn beats(&self, other: &Candidate) -> bool {
        let a = (self.word.len(), self.word.runs().len());
        let b = (other.word.len(), other.word.runs().len());
        (a, self.word.letters()) < (b, other.word.letters())
    }
}

fn merge_candidate(best: &mut Option<Candidate>, incoming: Option<Candidate>) {
    if let Some(c) = incoming {
        match best {
            Some(b) if !c.beats(b) => {}
            _ => *best = Some(c),
        }
    }
}

/// Structure summary of a word: run-length pattern plus switching count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureReport {
    pub runs: Vec<(Letter, u32)>,
    pub switching_count: usize,
}

pub fn classify_structure(word: &OperatorWord) -> StructureReport {
    StructureReport { runs: word.runs(), switching_count: word.switching_count() }
}

/// Best word in the three-step family `G^k1 L^k2 G`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlgOutcome {
    pub k1: u64,
    pub k2: u64,
    pub residual_probability: f64,
    pub queries: u64,
    /// Whether the returned pair meets the threshold (otherwise it is the
    /// global residual minimizer over the scanned ranges).
    pub achieved_epsilon: bool,
}

/// Exhaustive scan of the three-step family over `k1 <= k1_max`,
/// `k2 <= k2_max`: the minimal-query pair with residual probability within
/// `epsilon`, or the overall residual minimizer if none qualifies. Ties
/// break to the smallest `k1`, then `k2`.
pub fn glg_scan(geom: &DatabaseGeometry, k1_max: u64, k2_max: u64, epsilon: f64) -> GlgOutcome {
    glg_scan_filtered(geom, k1_max, k2_max, epsilon, u64::MAX)
}

/// As [`glg_scan`] but only over pairs with `k1 + k2 + 1 <= total_cap`.
fn glg_scan_filtered(
    geom: &DatabaseGeometry,
    k1_max: u64,
    k2_max: u64,
    epsilon: f64,
    total_cap: u64,
) -> GlgOutcome {
    let stepper = apply_word_incremental(geom);
    // (queries, k1, k2, residual) ordered by (queries, k1, k2)
    let mut success: Option<(u64, u64, u64, f64)> = None;
    // (residual, k1, k2) ordered as written
    let mut fallback: Option<(f64, u64, u64)> = None;

    let mut after_globals = initial_state(geom);
    for k1 in 0..=k1_max {
        if k1 > 0 {
            after_globals = stepper.step(Letter::Global, &after_globals);
        }
        if k1 + 1 > total_cap {
            break;
        }
        let mut state = after_globals;
        for k2 in 0..=k2_max {
            if k2 > 0 {
                state = stepper.step(Letter::Local, &state);
            }
            let queries = k1 + k2 + 1;
            if queries > total_cap {
                break;
            }
            let residual = stepper.step(Letter::Global, &state).residual_probability();
            if residual <= epsilon {
                let key = (queries, k1, k2, residual);
                if success.map_or(true, |s| (key.0, key.1, key.2) < (s.0, s.1, s.2)) {
                    success = Some(key);
                }
            }
            if fallback.map_or(true, |f| (residual, k1, k2) < f) {
                fallback = Some((residual, k1, k2));
            }
        }
    }

    match (success, fallback) {
        (Some((queries, k1, k2, residual)), _) => GlgOutcome {
            k1,
            k2,
            residual_probability: residual,
            queries,
            achieved_epsilon: true,
        },
        (None, Some((residual, k1, k2))) => GlgOutcome {
            k1,
            k2,
            residual_probability: residual,
            queries: k1 + k2 + 1,
            achieved_epsilon: false,
        },
        (None, None) => unreachable!("scan ranges are never empty"),
    }
}

/// Final report of an exhaustive word search.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchReport {
    pub n: u32,
    pub m: u32,
    pub epsilon: f64,
    pub max_len: u32,
    /// Shortest successful word under the tie-break, if any exists within
    /// the length cap.
    pub best: Option<Candidate>,
    pub words_examined: u64,
    /// Best three-step word with total queries within the same length cap.
    pub glg_best: Option<GlgOutcome>,
}

impl SearchReport {
    pub fn best_length(&self) -> Option<usize> {
        self.best.as_ref().map(|c| c.word.len())
    }

    pub fn structure(&self) -> Option<StructureReport> {
        self.best.as_ref().map(|c| classify_structure(&c.word))
    }
}

/// Evaluation strategy for one DFS step: the production path extends the
/// cached parent state; the test oracle recomputes from the whole path.
trait StepEval {
    fn child_state(&self, path: &[Letter], parent: &ReducedState) -> ReducedState;
}

struct SharedPrefixEval<'a> {
    stepper: crate::reduced::WordStepper,
    _geom: &'a DatabaseGeometry,
}

impl StepEval for SharedPrefixEval<'_> {
    fn child_state(&self, path: &[Letter], parent: &ReducedState) -> ReducedState {
        self.stepper.step(*path.last().expect("child path is nonempty"), parent)
    }
}

struct DfsState {
    epsilon: f64,
    /// Depth limit for expansion; shrinks to the best success length.
    cutoff: u32,
    best: Option<Candidate>,
    words_examined: u64,
}

impl DfsState {
    fn consider(&mut self, path: &[Letter], residual_probability: f64) {
        self.words_examined += 1;
        if residual_probability <= self.epsilon {
            let candidate = Candidate {
                word: OperatorWord::from_letters(path.to_vec()),
                residual_probability,
            };
            if self.best.as_ref().map_or(true, |b| candidate.beats(b)) {
                self.cutoff = candidate.word.len() as u32;
                self.best = Some(candidate);
            }
        }
    }
}

/// Depth-first expansion below the current node; Global explored first so
/// the in-order visit matches the lexicographic tie-break.
fn dfs<E: StepEval>(eval: &E, path: &mut Vec<Letter>, state: &ReducedState, out: &mut DfsState) {
    if (path.len() as u32) >= out.cutoff {
        return;
    }
    for letter in [Letter::Global, Letter::Local] {
        path.push(letter);
        let child = eval.child_state(path, state);
        out.consider(path, child.residual_probability());
        dfs(eval, path, &child, out);
        path.pop();
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionOutcome {
    pub best: Option<Candidate>,
    pub words_examined: u64,
}

/// Planned search: the short phase already executed, plus the independent
/// partitions any driver (serial or threaded) must run and merge.
#[derive(Clone, Debug)]
pub struct SearchPlan {
    geom: DatabaseGeometry,
    pub epsilon: f64,
    pub max_len: u32,
    short_best: Option<Candidate>,
    short_words: u64,
    /// Initial depth limit partitions start from (the short phase may
    /// already have found a success shorter than any partition word).
    pub initial_cutoff: u32,
    /// Lexicographically ordered prefixes; empty when the short phase
    /// already covers everything.
    pub prefixes: Vec<OperatorWord>,
}

fn words_required(max_len: u32) -> u64 {
    if max_len >= 63 {
        u64::MAX
    } else {
        (1u64 << (max_len + 1)) - 1
    }
}

impl SearchPlan {
    pub fn prepare(
        geom: &DatabaseGeometry,
        max_len: u32,
        epsilon: f64,
        budget: SearchBudget,
    ) -> Result<SearchPlan, SearchError> {
        let required_words = words_required(max_len);
        if required_words > budget.max_words {
            return Err(SearchError::BudgetExceeded {
                required_words,
                max_words: budget.max_words,
            });
        }

        let eval = SharedPrefixEval { stepper: apply_word_incremental(geom), _geom: geom };
        let initial = initial_state(geom);
        let short_limit = max_len.min(PARTITION_PREFIX_LEN.saturating_sub(1));
        let mut out = DfsState {
            epsilon,
            cutoff: short_limit,
            best: None,
            words_examined: 0,
        };
        // The empty word is examined too.
        out.consider(&[], initial.residual_probability());
        let mut path = Vec::with_capacity(max_len as usize);
        dfs(&eval, &mut path, &initial, &mut out);

        let short_found = out.best.as_ref().map(|c| c.word.len() as u32);
        let initial_cutoff = short_found.unwrap_or(max_len).min(max_len);
        // Partition words all have length >= the prefix length, so when the
        // short phase already beat that, partitions cannot contribute.
        let prefixes = if max_len >= PARTITION_PREFIX_LEN
            && initial_cutoff >= PARTITION_PREFIX_LEN
        {
            all_words_of_length(PARTITION_PREFIX_LEN)
        } else {
            Vec::new()
        };

        Ok(SearchPlan {
            geom: *geom,
            epsilon,
            max_len,
            short_best: out.best,
            short_words: out.words_examined,
            initial_cutoff,
            prefixes,
        })
    }

    /// Runs one partition subtree to completion. Pure; safe to call from
    /// any thread in any order.
    pub fn run_partition(&self, index: usize) -> PartitionOutcome {
        let prefix = &self.prefixes[index];
        let eval =
            SharedPrefixEval { stepper: apply_word_incremental(&self.geom), _geom: &self.geom };
        let mut state = initial_state(&self.geom);
        let mut path = Vec::with_capacity(self.max_len as usize);
        for &letter in prefix.letters() {
            path.push(letter);
            state = eval.stepper.step(letter, &state);
        }
        let mut out = DfsState {
            epsilon: self.epsilon,
            cutoff: self.initial_cutoff,
            best: None,
            words_examined: 0,
        };
        // The prefix itself is this partition's root word.
        out.consider(&path, state.residual_probability());
        dfs(&eval, &mut path, &state, &mut out);
        PartitionOutcome { best: out.best, words_examined: out.words_examined }
    }

    pub fn partition_count(&self) -> usize {
        self.prefixes.len()
    }

    /// Merges partition outcomes (in partition order) with the short phase
    /// into the final report. The merge is associative and the tie-break
    /// total, so the result does not depend on execution interleaving.
    pub fn finish<I>(&self, outcomes: I) -> SearchReport
    where
        I: IntoIterator<Item = PartitionOutcome>,
    {
        let mut best = self.short_best.clone();
        let mut words_examined = self.short_words;
        for outcome in outcomes {
            words_examined += outcome.words_examined;
            merge_candidate(&mut best, outcome.best);
        }
        let glg_best = if self.max_len >= 1 {
            Some(glg_scan_filtered(
                &self.geom,
                (self.max_len - 1) as u64,
                (self.max_len - 1) as u64,
                self.epsilon,
                self.max_len as u64,
            ))
        } else {
            None
        };
        SearchReport {
            n: self.geom.n,
            m: self.geom.m,
            epsilon: self.epsilon,
            max_len: self.max_len,
            best,
            words_examined,
            glg_best,
        }
    }
}

fn all_words_of_length(len: u32) -> Vec<OperatorWord> {
    let count = 1usize << len;
    let mut out = Vec::with_capacity(count);
    for bits in 0..count {
        let mut letters = Vec::with_capacity(len as usize);
        for position in (0..len).rev() {
            letters.push(if bits >> position & 1 == 0 { Letter::Global } else { Letter::Local });
        }
        out.push(OperatorWord::from_letters(letters));
    }
    out
}

/// Examines every word of length `0..=max_len` in length order (shared-prefix
/// depth-first under the hood) and returns the shortest word with residual
/// probability within `epsilon`, under the deterministic tie-break.
pub fn exhaustive_search(
    geom: &DatabaseGeometry,
    max_len: u32,
    epsilon: f64,
) -> Result<SearchReport, SearchError> {
    exhaustive_search_budgeted(geom, max_len, epsilon, SearchBudget::default())
}

pub fn exhaustive_search_budgeted(
    geom: &DatabaseGeometry,
    max_len: u32,
    epsilon: f64,
    budget: SearchBudget,
) -> Result<SearchReport, SearchError> {
    let plan = SearchPlan::prepare(geom, max_len, epsilon, budget)?;
    let outcomes: Vec<PartitionOutcome> =
        (0..plan.partition_count()).map(|i| plan.run_partition(i)).collect();
    Ok(plan.finish(outcomes))
}
