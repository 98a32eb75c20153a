//! Real-eigenvalue tables over ε, branch tracking across a sweep and
//! localization of exceptional points where two branches merge.
//!
//! A column of the table holds exactly the real roots of F that were
//! actually found; when fewer than the requested number exist the count
//! says so and no filler values are emitted.  Real roots can only
//! appear or disappear in pairs between adjacent ε steps, so odd count
//! changes are scan artifacts and are flagged.

use rayon::prelude::*;
use serde::Serialize;

use crate::contour::ContourSpec;
use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;
use crate::potential::{PotentialSpec, SOLVER_EPSILON_RANGE};
use crate::rootfind::{self, RootConfig};
use crate::shooting::Shooter;

/// Everything the eigenvalue pipeline needs besides (ε, λ).
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub tail_extent: f64,
    pub integrator: IntegratorConfig,
    pub grid_step: f64,
    pub tol: f64,
    pub flat_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tail_extent: crate::contour::DEFAULT_TAIL_EXTENT,
            integrator: IntegratorConfig::default(),
            grid_step: 0.05,
            tol: 1e-10,
            flat_threshold: 0.1,
        }
    }
}

/// Default energy window for n_max requested levels.
pub fn default_window(n_max: usize) -> (f64, f64) {
    (-2.0, 2.0 * n_max as f64 + 6.0)
}

/// Real eigenvalues found in a window, lowest first.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub energies: Vec<f64>,
    /// Total sign-change roots found in the window before truncation
    /// to n_max.
    pub found: usize,
    /// Candidate tangential zeros (no sign change) from the scan.
    pub flags: Vec<f64>,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    let (lo, hi) = SOLVER_EPSILON_RANGE;
    if !(epsilon > lo && epsilon < hi) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in ({lo}, {hi}) for the horizontal-tail method (got {epsilon})"
        )));
    }
    Ok(())
}

/// The lowest min(n_max, found) real eigenvalues of the (ε, λ)
/// Hamiltonian inside `window`, each bisected to `cfg.tol`.
pub fn real_eigenvalues(
    epsilon: f64,
    lambda: u32,
    n_max: usize,
    window: (f64, f64),
    cfg: &SolverConfig,
) -> Result<EigenResult> {
    check_epsilon(epsilon)?;
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be ≥ 1".into()));
    }
    let spec = ContourSpec::new(lambda, cfg.tail_extent)?;
    let pspec = PotentialSpec::new(epsilon);
    let shooter = Shooter::new(&spec, &pspec, &cfg.integrator)?;
    let f = |e: f64| shooter.mismatch(e).map(|m| m.f);
    let root_cfg = RootConfig {
        e_min: window.0,
        e_max: window.1,
        grid_step: cfg.grid_step,
        tol: cfg.tol,
        flat_threshold: cfg.flat_threshold,
    };
    let (mut roots, flags) = rootfind::find_roots(&f, &root_cfg)?;
    let found = roots.len();
    roots.truncate(n_max);
    Ok(EigenResult {
        energies: roots,
        found,
        flags,
    })
}

/// One ε slice of a sweep. `error` records a per-ε failure without
/// aborting the rest of the sweep.
#[derive(Debug, Clone)]
pub struct EpsColumn {
    pub epsilon: f64,
    pub energies: Vec<f64>,
    pub found: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SpectralTable {
    pub lambda: u32,
    pub columns: Vec<EpsColumn>,
}

/// Flattened row of a table.
#[derive(Debug, Clone, Copy)]
pub struct SpectralRow {
    pub epsilon: f64,
    pub lambda: u32,
    pub index: usize,
    pub energy: f64,
}

impl SpectralTable {
    pub fn rows(&self) -> impl Iterator<Item = SpectralRow> + '_ {
        self.columns.iter().flat_map(move |c| {
            c.energies.iter().enumerate().map(move |(i, &e)| SpectralRow {
                epsilon: c.epsilon,
                lambda: self.lambda,
                index: i,
                energy: e,
            })
        })
    }

    /// Adjacent ε pairs whose real-root counts differ by an odd number
    /// (eigenvalues complexify in conjugate pairs, so these are scan
    /// artifacts).
    pub fn parity_violations(&self) -> Vec<(f64, f64)> {
        self.columns
            .windows(2)
            .filter(|w| w[0].error.is_none() && w[1].error.is_none())
            .filter(|w| (w[0].energies.len() + w[1].energies.len()) % 2 == 1)
            .map(|w| (w[0].epsilon, w[1].epsilon))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub eps_from: f64,
    pub eps_to: f64,
    pub eps_step: f64,
    pub lambda: u32,
    pub n_max: usize,
    /// Initial per-ε energy window; defaults to [`default_window`].
    pub window: Option<(f64, f64)>,
    /// Upper energy the window may be expanded to when fewer than
    /// n_max roots are found; defaults to twice the initial top.
    pub window_cap: Option<f64>,
}

impl SweepConfig {
    pub fn new(eps_from: f64, eps_to: f64, eps_step: f64, lambda: u32, n_max: usize) -> Self {
        Self {
            eps_from,
            eps_to,
            eps_step,
            lambda,
            n_max,
            window: None,
            window_cap: None,
        }
    }

    fn grid(&self) -> Result<Vec<f64>> {
        if !(self.eps_step > 0.0 && self.eps_from < self.eps_to) {
            return Err(Error::InvalidParameter(format!(
                "empty ε range [{}, {}] step {}",
                self.eps_from, self.eps_to, self.eps_step
            )));
        }
        let n = ((self.eps_to - self.eps_from) / self.eps_step).round() as usize;
        Ok((0..=n)
            .map(|k| self.eps_from + k as f64 * self.eps_step)
            .filter(|&e| e <= self.eps_to + 1e-12)
            .collect())
    }
}

/// Eigenvalues with the window expanded upward until n_max roots or
/// the cap is reached.
pub fn real_eigenvalues_expanding(
    epsilon: f64,
    lambda: u32,
    n_max: usize,
    window: (f64, f64),
    cap: f64,
    cfg: &SolverConfig,
) -> Result<EigenResult> {
    let mut result = real_eigenvalues(epsilon, lambda, n_max, window, cfg)?;
    let span = window.1 - window.0;
    let mut top = window.1;
    while result.found < n_max && top < cap {
        let new_top = (top + 0.5 * span).min(cap);
        // scan only the extension, overlapping one grid step
        let ext = real_eigenvalues(
            epsilon,
            lambda,
            n_max,
            (top - cfg.grid_step, new_top),
            cfg,
        )?;
        for e in ext.energies {
            if result.energies.last().is_none_or(|&l| e > l + cfg.tol) {
                result.energies.push(e);
                result.found += 1;
            }
        }
        result.flags.extend(ext.flags);
        top = new_top;
    }
    result.energies.truncate(n_max);
    Ok(result)
}

/// Sweep ε at fixed λ. Per-ε failures are recorded in the column and
/// never abort the sweep; columns are computed in parallel.
pub fn sweep(sweep_cfg: &SweepConfig, cfg: &SolverConfig) -> Result<SpectralTable> {
    let grid = sweep_cfg.grid()?;
    let window = sweep_cfg
        .window
        .unwrap_or_else(|| default_window(sweep_cfg.n_max));
    let cap = sweep_cfg.window_cap.unwrap_or(2.0 * window.1);
    let columns: Vec<EpsColumn> = grid
        .par_iter()
        .map(|&epsilon| {
            match real_eigenvalues_expanding(
                epsilon,
                sweep_cfg.lambda,
                sweep_cfg.n_max,
                window,
                cap,
                cfg,
            ) {
                Ok(r) => EpsColumn {
                    epsilon,
                    energies: r.energies,
                    found: r.found,
                    error: None,
                },
                Err(e) => EpsColumn {
                    epsilon,
                    energies: Vec::new(),
                    found: 0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SpectralTable {
        lambda: sweep_cfg.lambda,
        columns,
    })
}

/// A table column with stable branch labels attached to each energy.
#[derive(Debug, Clone)]
pub struct TrackedColumn {
    pub epsilon: f64,
    /// (branch id, energy), energies ascending.
    pub entries: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
pub struct TrackedTable {
    pub lambda: u32,
    pub columns: Vec<TrackedColumn>,
    pub n_branches: usize,
    /// Matches that were decided by order preservation between two
    /// equally near candidates.
    pub ambiguities: Vec<String>,
}

impl TrackedTable {
    /// ε-extent of each branch: (first ε, last ε).
    pub fn branch_spans(&self) -> Vec<(f64, f64)> {
        let mut spans = vec![(f64::INFINITY, f64::NEG_INFINITY); self.n_branches];
        for c in &self.columns {
            for &(id, _) in &c.entries {
                spans[id].0 = spans[id].0.min(c.epsilon);
                spans[id].1 = spans[id].1.max(c.epsilon);
            }
        }
        spans
    }

    pub fn branch_energies(&self, id: usize) -> Vec<(f64, f64)> {
        self.columns
            .iter()
            .flat_map(|c| {
                c.entries
                    .iter()
                    .filter(move |&&(b, _)| b == id)
                    .map(move |&(_, e)| (c.epsilon, e))
            })
            .collect()
    }
}

/// Matches with an energy jump above this are treated as branch
/// end/start rather than continuation.
const TRACK_MAX_JUMP: f64 = 1.5;
const TRACK_GAP_COST: f64 = 0.75;

/// Incremental branch labeler; feed it sweep columns in ε order and it
/// hands back stable branch ids. Ids are assigned once and never
/// revised, so callers may flush labeled rows as they go.
#[derive(Debug, Default)]
pub struct BranchTracker {
    prev: Option<(Vec<usize>, Vec<f64>)>,
    n_branches: usize,
    ambiguities: Vec<String>,
}

impl BranchTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_branches(&self) -> usize {
        self.n_branches
    }

    pub fn ambiguities(&self) -> &[String] {
        &self.ambiguities
    }

    /// Label one column of ascending energies.
    pub fn push(&mut self, epsilon: f64, energies: &[f64]) -> Vec<usize> {
        let ids: Vec<usize> = match &self.prev {
            None => {
                let ids = (0..energies.len()).map(|i| self.n_branches + i).collect();
                self.n_branches += energies.len();
                ids
            }
            Some((prev_ids, prev_e)) => {
                let pairs = align(prev_e, energies, &mut self.ambiguities, epsilon);
                let mut ids = vec![usize::MAX; energies.len()];
                for (i, j) in pairs {
                    ids[j] = prev_ids[i];
                }
                for id in ids.iter_mut() {
                    if *id == usize::MAX {
                        *id = self.n_branches;
                        self.n_branches += 1;
                    }
                }
                ids
            }
        };
        self.prev = Some((ids.clone(), energies.to_vec()));
        ids
    }
}

/// Assign stable branch ids by order-preserving nearest-energy
/// alignment between consecutive ε columns. A branch ends when its
/// energy finds no partner in the next column.
pub fn track(table: &SpectralTable) -> TrackedTable {
    let mut tracker = BranchTracker::new();
    let mut columns: Vec<TrackedColumn> = Vec::with_capacity(table.columns.len());
    for col in &table.columns {
        let ids = tracker.push(col.epsilon, &col.energies);
        columns.push(TrackedColumn {
            epsilon: col.epsilon,
            entries: ids.into_iter().zip(col.energies.iter().copied()).collect(),
        });
    }
    TrackedTable {
        lambda: table.lambda,
        columns,
        n_branches: tracker.n_branches,
        ambiguities: tracker.ambiguities,
    }
}

/// Minimal-cost order-preserving alignment of two ascending energy
/// lists (Needleman–Wunsch with a gap cost); returns matched index
/// pairs.
fn align(
    a: &[f64],
    b: &[f64],
    ambiguities: &mut Vec<String>,
    epsilon: f64,
) -> Vec<(usize, usize)> {
    let (n, m) = (a.len(), b.len());
    let big = f64::INFINITY;
    let mut cost = vec![vec![0.0f64; m + 1]; n + 1];
    for i in 1..=n {
        cost[i][0] = i as f64 * TRACK_GAP_COST;
    }
    for j in 1..=m {
        cost[0][j] = j as f64 * TRACK_GAP_COST;
    }
    for i in 1..=n {
        for j in 1..=m {
            let d = (a[i - 1] - b[j - 1]).abs();
            let pair = if d <= TRACK_MAX_JUMP {
                cost[i - 1][j - 1] + d
            } else {
                big
            };
            let gap_a = cost[i - 1][j] + TRACK_GAP_COST;
            let gap_b = cost[i][j - 1] + TRACK_GAP_COST;
            cost[i][j] = pair.min(gap_a).min(gap_b);
        }
    }
    // trace back; ties resolved in favor of matching (order preservation)
    let mut pairs = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 && j > 0 {
        let d = (a[i - 1] - b[j - 1]).abs();
        let pair = if d <= TRACK_MAX_JUMP {
            cost[i - 1][j - 1] + d
        } else {
            big
        };
        let gap_a = cost[i - 1][j] + TRACK_GAP_COST;
        let gap_b = cost[i][j - 1] + TRACK_GAP_COST;
        if pair <= gap_a && pair <= gap_b {
            if (pair - gap_a.min(gap_b)).abs() < 1e-12 && pair.is_finite() {
                ambiguities.push(format!(
                    "ε={epsilon}: tie between match and gap at energy {}",
                    b[j - 1]
                ));
            }
            pairs.push((i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if gap_a <= gap_b {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    pairs.reverse();
    pairs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EpStatus {
    Bracketed,
    Refined,
}

/// An ε value where two real eigenvalues merge and leave the real axis.
#[derive(Debug, Clone, Serialize)]
pub struct ExceptionalPoint {
    pub eps_lo: f64,
    pub eps_hi: f64,
    pub eps_star: f64,
    pub energy_star: f64,
    pub pair: (usize, usize),
    pub status: EpStatus,
}

/// How far the ε-bracket is narrowed by [`locate_exceptional`].
pub const EP_EPS_TOL: f64 = 1e-3;

/// Bisect on ε the predicate "at least two real roots of F inside
/// `energy_window`". The pair must be present at exactly one end of
/// `eps_bracket`; `pair` is carried through for labeling only.
pub fn locate_exceptional(
    lambda: u32,
    pair: (usize, usize),
    eps_bracket: (f64, f64),
    energy_window: (f64, f64),
    cfg: &SolverConfig,
) -> Result<ExceptionalPoint> {
    let (mut lo, mut hi) = eps_bracket;
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "empty ε bracket [{lo}, {hi}]"
        )));
    }
    let roots_at = |eps: f64| -> Result<Vec<f64>> {
        Ok(real_eigenvalues(eps, lambda, usize::MAX >> 1, energy_window, cfg)?.energies)
    };
    let present = |roots: &[f64]| roots.len() >= 2;

    let r_lo = roots_at(lo)?;
    let r_hi = roots_at(hi)?;
    let (p_lo, p_hi) = (present(&r_lo), present(&r_hi));
    if p_lo == p_hi {
        return Err(Error::PredicateNoisy {
            eps_lo: lo,
            eps_hi: hi,
            detail: format!(
                "pair present at both ends or neither ({} and {} roots)",
                r_lo.len(),
                r_hi.len()
            ),
        });
    }
    let mut surviving = if p_lo { r_lo } else { r_hi };

    while hi - lo > EP_EPS_TOL {
        let mid = 0.5 * (lo + hi);
        let r_mid = roots_at(mid)?;
        if present(&r_mid) == p_lo {
            lo = mid;
            if p_lo {
                surviving = r_mid;
            }
        } else {
            hi = mid;
            if p_hi {
                surviving = r_mid;
            }
        }
    }

    // the merging pair is the closest adjacent pair at the last ε
    // where both roots were still real
    let (a, b) = surviving
        .windows(2)
        .map(|w| (w[0], w[1]))
        .min_by(|x, y| (x.1 - x.0).partial_cmp(&(y.1 - y.0)).unwrap())
        .expect("predicate guaranteed ≥ 2 roots");

    Ok(ExceptionalPoint {
        eps_lo: lo,
        eps_hi: hi,
        eps_star: 0.5 * (lo + hi),
        energy_star: 0.5 * (a + b),
        pair,
        status: EpStatus::Refined,
    })
}

/// Scan a tracked sweep for steps where a pair of branches ends (or
/// emerges) together, and refine each candidate merge into an
/// [`ExceptionalPoint`]. Candidates whose refinement fails are
/// returned as errors alongside the successes.
pub fn detect_exceptional(
    tracked: &TrackedTable,
    cfg: &SolverConfig,
) -> Vec<Result<ExceptionalPoint>> {
    let mut out = Vec::new();
    for w in tracked.columns.windows(2) {
        let (cur, next) = (&w[0], &w[1]);
        // branches present on exactly one side of the step
        let gone: Vec<&(usize, f64)> = cur
            .entries
            .iter()
            .filter(|(id, _)| !next.entries.iter().any(|(j, _)| j == id))
            .collect();
        let born: Vec<&(usize, f64)> = next
            .entries
            .iter()
            .filter(|(id, _)| !cur.entries.iter().any(|(j, _)| j == id))
            .collect();
        // a merge on the ε-ascending side, or an emergence; adjacent
        // entries pair up since each list is energy-ordered
        for side in [&gone, &born] {
            for pair in side.chunks(2) {
                if pair.len() != 2 {
                    continue;
                }
                let (a, b) = (pair[0], pair[1]);
                let window = (a.1.min(b.1) - 1.0, a.1.max(b.1) + 1.0);
                out.push(locate_exceptional(
                    tracked.lambda,
                    (a.0, b.0),
                    (cur.epsilon, next.epsilon),
                    window,
                    cfg,
                ));
            }
        }
    }
    out
}
