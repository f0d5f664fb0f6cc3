//! Randomized common subexpression elimination for `Y = M X` over
//! characteristic 2.
//!
//! The optimizer rewrites the rows of `M` while keeping the value of every row
//! fixed. Columns start as the inputs `X_j`; transforms append two kinds of
//! derived column:
//!
//! * `Sum(r)`: the value `Y_r` of row `r`, introduced by a differential
//!   transform that computes one row from another plus their difference.
//! * `Pattern(a, b)`: `X_a + X_b`, introduced by a recurrence transform when
//!   the pair occurs in several rows.
//!
//! Reversal transforms may add auxiliary rows that are computed but not
//! output. The cost of the current state is one addition per pattern plus
//! `weight - 1` per nonempty row.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::cmp::Reverse;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitmat::{row_xor, row_xor_len, toggle, BinaryMatrix};
use crate::error::{Error, Result};
use crate::schedule::{Schedule, Slot, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Exhaustive candidate search after every transform.
    Classic,
    /// Incrementally maintained saving arrays; differential transforms run to
    /// exhaustion before any recurrence transform.
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    DifferentialFirst,
    /// Picks whichever kind of transform saves more at each step.
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CseConfig {
    pub l_d: usize,
    pub l_r: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    pub recurrence_only: bool,
}

impl Default for CseConfig {
    fn default() -> Self {
        CseConfig {
            l_d: 2,
            l_r: 2,
            seed: 0,
            algorithm: Algorithm::Fast,
            strategy: Strategy::DifferentialFirst,
            recurrence_only: false,
        }
    }
}

impl CseConfig {
    /// Defaults with the candidate window narrowed to 1 for matrices with
    /// more than 63 rows.
    pub fn for_rows(n_rows: usize) -> Self {
        let l = if n_rows <= 63 { 2 } else { 1 };
        CseConfig { l_d: l, l_r: l, ..CseConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Column {
    Input(usize),
    Sum(usize),
    Pattern(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransformKind {
    Differential { parent: usize, child: usize },
    Recurrence { a: usize, b: usize, column: usize, forced: usize },
    Reversal { row: usize, sum_row: usize, summand: usize },
}

/// One applied transform with the saving it claimed and what it achieved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transform {
    pub kind: TransformKind,
    pub claimed: usize,
    pub weight_before: usize,
    pub weight_after: usize,
    pub cost_before: usize,
    pub cost_after: usize,
}

#[derive(Debug, Clone, Default)]
struct Visit {
    epoch: u32,
    rows: Vec<u32>,
    cols: Vec<u32>,
}

/// Differential savings `d[p][c]` for computing row `c` from row `p`, with -1
/// for pairs that are ineligible. `k` keeps an older copy of a parent row
/// when it gives the better saving for a particular child.
#[derive(Debug, Clone)]
struct DiffArrays {
    d: Vec<Vec<i32>>,
    positive: BTreeSet<(Reverse<i32>, usize, usize)>,
    k: BTreeMap<(usize, usize), Vec<usize>>,
    retired: BTreeSet<(usize, usize)>,
}

impl DiffArrays {
    fn set(&mut self, p: usize, c: usize, v: i32) {
        let old = self.d[p][c];
        if old > 0 {
            self.positive.remove(&(Reverse(old), p, c));
        }
        if v > 0 {
            self.positive.insert((Reverse(v), p, c));
        }
        self.d[p][c] = v;
    }
}

/// Frequencies of unordered column pairs `a < b` across rows, with the pairs
/// occurring at least twice ranked by frequency then index.
#[derive(Debug, Clone, Default)]
struct PairCounts {
    counts: BTreeMap<(usize, usize), usize>,
    ranked: BTreeSet<(Reverse<usize>, usize, usize)>,
}

impl PairCounts {
    fn bump(&mut self, a: usize, b: usize, up: bool) {
        let key = if a < b { (a, b) } else { (b, a) };
        let old = self.counts.get(&key).copied().unwrap_or(0);
        let new = if up { old + 1 } else { old - 1 };
        if old >= 2 {
            self.ranked.remove(&(Reverse(old), key.0, key.1));
        }
        if new >= 2 {
            self.ranked.insert((Reverse(new), key.0, key.1));
        }
        if new == 0 {
            self.counts.remove(&key);
        } else {
            self.counts.insert(key, new);
        }
    }

    fn from_rows(rows: &[Vec<usize>]) -> Self {
        let mut counts = BTreeMap::new();
        for row in rows {
            for (i, &a) in row.iter().enumerate() {
                for &b in &row[i + 1..] {
                    *counts.entry((a, b)).or_insert(0usize) += 1;
                }
            }
        }
        let ranked = counts
            .iter()
            .filter(|(_, &f)| f >= 2)
            .map(|(&(a, b), &f)| (Reverse(f), a, b))
            .collect();
        PairCounts { counts, ranked }
    }
}

/// The optimizer state: current rows, column registry, identified patterns
/// and the bookkeeping for incremental saving updates.
#[derive(Debug, Clone)]
pub struct OptState {
    n_inputs: usize,
    n_outputs: usize,
    columns: Vec<Column>,
    rows: Vec<Vec<usize>>,
    sum_col: Vec<Option<usize>>,
    patterns: Vec<usize>,
    by_operand: Vec<Vec<usize>>,
    config: CseConfig,
    rng: ChaCha8Rng,
    history: Vec<Transform>,
    visit: RefCell<Visit>,
    diff: Option<DiffArrays>,
    pairs: Option<PairCounts>,
}

/// `max(0, w_c - w_d - 1)` for computing `rc` as `rp` plus the difference.
pub fn differential_saving(rp: &[usize], rc: &[usize]) -> usize {
    (rc.len() as isize - row_xor_len(rp, rc) as isize - 1).max(0) as usize
}

fn contains(row: &[usize], x: usize) -> bool {
    row.binary_search(&x).is_ok()
}

/// Uniform choice within the first `l` candidates.
fn pick<T: Copy>(rng: &mut ChaCha8Rng, window: &[T]) -> Option<T> {
    if window.is_empty() {
        None
    } else {
        Some(window[rng.gen_range(0..window.len())])
    }
}

/// The `limit` best eligible candidates of `ranked` (sorted best first by
/// key). Candidates tied at the cut are drawn uniformly at random, and
/// `eligible` is only called on drawn candidates.
fn draw_window<K: PartialEq, T: Copy>(
    rng: &mut ChaCha8Rng,
    ranked: impl IntoIterator<Item = (K, T)>,
    limit: usize,
    mut eligible: impl FnMut(T) -> bool,
) -> Vec<T> {
    let mut window = Vec::with_capacity(limit);
    let mut ranked = ranked.into_iter().peekable();
    let mut group = Vec::new();
    while window.len() < limit {
        let Some((key, first)) = ranked.next() else { break };
        group.clear();
        group.push(first);
        while let Some((_, t)) = ranked.next_if(|(k, _)| *k == key) {
            group.push(t);
        }
        while window.len() < limit && !group.is_empty() {
            let t = group.swap_remove(rng.gen_range(0..group.len()));
            if eligible(t) {
                window.push(t);
            }
        }
    }
    window
}

impl OptState {
    pub fn new(m: &BinaryMatrix, config: CseConfig) -> Self {
        let n_inputs = m.n_cols();
        let rows = m.rows().to_vec();
        OptState {
            n_inputs,
            n_outputs: rows.len(),
            columns: (0..n_inputs).map(Column::Input).collect(),
            sum_col: vec![None; rows.len()],
            rows,
            patterns: Vec::new(),
            by_operand: vec![Vec::new(); n_inputs],
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            history: Vec::new(),
            visit: RefCell::new(Visit::default()),
            diff: None,
            pairs: None,
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> &[usize] {
        &self.rows[r]
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    /// Pattern columns in identification order.
    pub fn patterns(&self) -> &[usize] {
        &self.patterns
    }

    /// Column holding `Y_r`, if one has been introduced.
    pub fn sum_column(&self, r: usize) -> Option<usize> {
        self.sum_col[r]
    }

    pub fn history(&self) -> &[Transform] {
        &self.history
    }

    pub fn config(&self) -> &CseConfig {
        &self.config
    }

    /// Current rows as a matrix over all columns.
    pub fn matrix(&self) -> BinaryMatrix {
        BinaryMatrix::from_rows(self.columns.len(), self.rows.clone()).expect("rows stay sorted")
    }

    pub fn weight(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Additions needed to evaluate the current state.
    pub fn cost(&self) -> usize {
        self.patterns.len() + self.rows.iter().map(|r| r.len().saturating_sub(1)).sum::<usize>()
    }

    fn push_column(&mut self, c: Column) -> usize {
        self.columns.push(c);
        self.by_operand.push(Vec::new());
        self.columns.len() - 1
    }

    fn ensure_sum(&mut self, r: usize) -> usize {
        match self.sum_col[r] {
            Some(c) => c,
            None => {
                let c = self.push_column(Column::Sum(r));
                self.sum_col[r] = Some(c);
                c
            }
        }
    }

    fn operands(&self, col: usize) -> (usize, usize) {
        match self.columns[col] {
            Column::Pattern(a, b) => (a, b),
            _ => unreachable!("not a pattern column"),
        }
    }

    /// Replaces a row, keeping pair frequencies current.
    fn set_row(&mut self, r: usize, new: Vec<usize>) {
        if let Some(pairs) = self.pairs.as_mut() {
            let old = &self.rows[r];
            let removed = row_xor(old, &new).into_iter().filter(|&x| contains(old, x)).collect::<Vec<_>>();
            let added = row_xor(old, &new).into_iter().filter(|&x| contains(&new, x)).collect::<Vec<_>>();
            for &x in &removed {
                for &y in old {
                    if y != x && (!contains(&removed, y) || y > x) {
                        pairs.bump(x, y, false);
                    }
                }
            }
            for &z in &added {
                for &y in &new {
                    if y != z && (!contains(&added, y) || y > z) {
                        pairs.bump(z, y, true);
                    }
                }
            }
        }
        self.rows[r] = new;
    }

    /// Whether evaluating any of `cols`, or any of `rows`, needs the value of
    /// row `target`.
    fn reaches(&self, cols: &[usize], rows: &[usize], target: usize) -> bool {
        let mut v = self.visit.borrow_mut();
        v.epoch = v.epoch.wrapping_add(1);
        if v.epoch == 0 {
            v.rows.iter_mut().for_each(|x| *x = 0);
            v.cols.iter_mut().for_each(|x| *x = 0);
            v.epoch = 1;
        }
        let epoch = v.epoch;
        v.rows.resize(self.rows.len(), 0);
        v.cols.resize(self.columns.len(), 0);
        let mut stack: Vec<usize> = Vec::new();
        let enter_row = |q: usize, v: &mut Visit, stack: &mut Vec<usize>| -> bool {
            if q == target {
                return true;
            }
            if v.rows[q] != epoch {
                v.rows[q] = epoch;
                stack.extend_from_slice(&self.rows[q]);
            }
            false
        };
        for &q in rows {
            if enter_row(q, &mut v, &mut stack) {
                return true;
            }
        }
        stack.extend_from_slice(cols);
        while let Some(c) = stack.pop() {
            if v.cols[c] == epoch {
                continue;
            }
            v.cols[c] = epoch;
            match self.columns[c] {
                Column::Input(_) => {}
                Column::Pattern(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
                Column::Sum(q) => {
                    if enter_row(q, &mut v, &mut stack) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Row `c` rewritten with parent row `p` taken in version `vp`.
    fn differential_row(&self, vp: &[usize], p: usize, c: usize) -> Vec<usize> {
        let mut new = row_xor(&self.rows[c], vp);
        match self.sum_col[p] {
            Some(col) => toggle(&mut new, col),
            None => new.push(self.columns.len()),
        }
        new
    }

    fn saving_with(&self, vp: &[usize], p: usize, c: usize) -> i32 {
        let rc = &self.rows[c];
        let xor = row_xor_len(rc, vp) as i32;
        let sum_in_xor = self.sum_col[p].is_some_and(|s| contains(rc, s) != contains(vp, s));
        rc.len() as i32 - if sum_in_xor { xor - 1 } else { xor + 1 }
    }

    /// Whether computing row `c` from version `vp` of row `p` would make some
    /// row depend on itself.
    fn cycle_with(&self, vp: &[usize], p: usize, c: usize) -> bool {
        let rc = &self.rows[c];
        let fresh: Vec<usize> = vp.iter().copied().filter(|&x| !contains(rc, x)).collect();
        self.reaches(&fresh, &[p], c)
    }

    /// Whether computing row `rc` from the current row `rp` closes a
    /// dependency cycle.
    pub fn is_cycle_inducing(&self, rp: usize, rc: usize) -> bool {
        self.cycle_with(&self.rows[rp], rp, rc)
    }

    /// The row version `apply_differential(p, c)` would use for `p`.
    fn parent_version(&self, p: usize, c: usize) -> &[usize] {
        self.diff
            .as_ref()
            .and_then(|d| d.k.get(&(p, c)))
            .map_or(&self.rows[p][..], |v| &v[..])
    }

    /// Saving of computing row `c` from row `p`, using a stored older copy of
    /// `p` when the saving arrays hold one.
    pub fn differential_saving_of(&self, p: usize, c: usize) -> usize {
        self.saving_with(self.parent_version(p, c), p, c).max(0) as usize
    }

    /// Computes row `c` as `Y_p` plus the difference of the two rows. Returns
    /// the saving.
    pub fn apply_differential(&mut self, p: usize, c: usize) -> Result<usize> {
        if p == c || p >= self.rows.len() || c >= self.rows.len() {
            return Err(Error::Precondition("differential pair must be two distinct rows"));
        }
        let vp = self.parent_version(p, c).to_vec();
        let saving = self.saving_with(&vp, p, c);
        if saving <= 0 {
            return Err(Error::Precondition("differential saving is not positive"));
        }
        if self.cycle_with(&vp, p, c) {
            return Err(Error::Precondition("differential pair is cycle-inducing"));
        }
        let (w0, c0) = (self.weight(), self.cost());
        let mut new = self.differential_row(&vp, p, c);
        if self.sum_col[p].is_none() {
            new.pop();
            let col = self.ensure_sum(p);
            new.push(col);
        }
        let old = self.rows[c].clone();
        self.set_row(c, new);
        if self.diff.is_some() {
            self.update_d(p, c, old);
        }
        self.record(TransformKind::Differential { parent: p, child: c }, saving as usize, w0, c0);
        Ok(saving as usize)
    }

    fn record(&mut self, kind: TransformKind, claimed: usize, weight_before: usize, cost_before: usize) {
        let t = Transform {
            kind,
            claimed,
            weight_before,
            weight_after: self.weight(),
            cost_before,
            cost_after: self.cost(),
        };
        self.history.push(t);
    }

    /// Builds the differential saving array over the output rows.
    pub fn init_differential_array(&mut self) {
        let n = self.n_outputs;
        let mut arr = DiffArrays {
            d: vec![vec![0; n]; n],
            positive: BTreeSet::new(),
            k: BTreeMap::new(),
            retired: BTreeSet::new(),
        };
        for p in 0..n {
            for c in 0..n {
                let v = if p == c {
                    -1
                } else {
                    let s = self.saving_with(&self.rows[p], p, c).max(0);
                    if s > 0 && self.is_cycle_inducing(p, c) {
                        -1
                    } else {
                        s
                    }
                };
                arr.set(p, c, v);
            }
        }
        self.diff = Some(arr);
    }

    /// Current differential saving array, if initialized.
    pub fn d_matrix(&self) -> Option<Vec<Vec<i32>>> {
        self.diff.as_ref().map(|d| d.d.clone())
    }

    /// Stored older copy of row `p` for child `c`.
    pub fn snapshot(&self, p: usize, c: usize) -> Option<&[usize]> {
        self.diff.as_ref()?.k.get(&(p, c)).map(|v| &v[..])
    }

    /// Refreshes row `c` and column `c` of the saving array after row `c`
    /// changed from `old_c`.
    fn update_d(&mut self, p: usize, c: usize, old_c: Vec<usize>) {
        let mut arr = self.diff.take().expect("saving array present");
        arr.k.remove(&(p, c));
        arr.retired.insert((p, c));
        arr.set(p, c, -1);
        for i in 0..self.n_outputs {
            if i == c {
                continue;
            }
            // c as the parent of i: keep whichever copy of row c saves more
            if !arr.retired.contains(&(c, i)) {
                let prior = arr.k.get(&(c, i)).cloned().unwrap_or_else(|| old_c.clone());
                let s_old = self.saving_with(&prior, c, i);
                let s_new = self.saving_with(&self.rows[c], c, i);
                let keep_old = s_old > s_new || (s_old == s_new && s_old > 0 && self.rng.gen_bool(0.5));
                let s = if keep_old {
                    arr.k.insert((c, i), prior);
                    s_old
                } else {
                    arr.k.remove(&(c, i));
                    s_new
                };
                let version = arr.k.get(&(c, i)).map_or(&self.rows[c][..], |v| &v[..]);
                let v = if s > 0 && self.cycle_with(version, c, i) { -1 } else { s.max(0) };
                arr.set(c, i, v);
            }
            // i as the parent of c
            if !arr.retired.contains(&(i, c)) {
                let s_cur = self.saving_with(&self.rows[i], i, c);
                let s = match arr.k.get(&(i, c)) {
                    Some(kv) => {
                        let s_k = self.saving_with(kv, i, c);
                        if s_k > s_cur {
                            s_k
                        } else {
                            arr.k.remove(&(i, c));
                            s_cur
                        }
                    }
                    None => s_cur,
                };
                let version = arr.k.get(&(i, c)).map_or(&self.rows[i][..], |v| &v[..]);
                let v = if s > 0 && self.cycle_with(version, i, c) { -1 } else { s.max(0) };
                arr.set(i, c, v);
            }
        }
        self.diff = Some(arr);
    }

    /// Picks among the `l_d` best eligible entries of the saving array,
    /// marking cycle-inducing entries met on the way.
    fn select_from_d(&mut self) -> Option<(usize, usize)> {
        let mut arr = self.diff.take()?;
        let mut rng = self.rng.clone();
        let mut bad = Vec::new();
        let window = draw_window(
            &mut rng,
            arr.positive.iter().map(|&(s, p, c)| (s, (p, c))),
            self.config.l_d,
            |(p, c)| {
                let version = arr.k.get(&(p, c)).map_or(&self.rows[p][..], |v| &v[..]);
                let cyclic = self.cycle_with(version, p, c);
                if cyclic {
                    bad.push((p, c));
                }
                !cyclic
            },
        );
        for (p, c) in bad {
            arr.set(p, c, -1);
        }
        self.diff = Some(arr);
        let choice = pick(&mut rng, &window);
        self.rng = rng;
        choice
    }

    /// Up to `limit` eligible differential pairs over every row, best first
    /// with ties at the cut broken at random.
    fn differential_candidates(&mut self, limit: usize) -> Vec<(usize, usize, usize)> {
        let n = self.rows.len();
        let mut all = Vec::new();
        for p in 0..n {
            for c in 0..n {
                if p != c {
                    let s = self.saving_with(&self.rows[p], p, c);
                    if s > 0 {
                        all.push((s as usize, p, c));
                    }
                }
            }
        }
        all.sort_unstable_by_key(|&(s, p, c)| (Reverse(s), p, c));
        let mut rng = self.rng.clone();
        let mut out = draw_window(&mut rng, all.into_iter().map(|t| (t.0, t)), limit, |(_, p, c)| {
            !self.is_cycle_inducing(p, c)
        });
        self.rng = rng;
        out.sort_unstable_by_key(|&(s, p, c)| (Reverse(s), p, c));
        out
    }

    /// Recurrence saving (frequency minus one) of every pair occurring in at
    /// least one row.
    pub fn recurrence_savings(&self) -> BTreeMap<(usize, usize), usize> {
        let counts = match &self.pairs {
            Some(p) => p.counts.clone(),
            None => PairCounts::from_rows(&self.rows).counts,
        };
        counts.into_iter().map(|(k, f)| (k, f - 1)).collect()
    }

    /// Starts incremental pair-frequency tracking.
    pub fn init_pair_counts(&mut self) {
        self.pairs = Some(PairCounts::from_rows(&self.rows));
    }

    fn select_pattern(&mut self) -> Option<(usize, (usize, usize))> {
        let pairs = self.pairs.as_ref()?;
        let window = draw_window(
            &mut self.rng,
            pairs.ranked.iter().map(|&(Reverse(f), a, b)| (f, (f, (a, b)))),
            self.config.l_r,
            |_| true,
        );
        pick(&mut self.rng, &window)
    }

    fn best_pattern_saving(&self) -> usize {
        self.pairs
            .as_ref()
            .and_then(|p| p.ranked.iter().next())
            .map_or(0, |&(Reverse(f), _, _)| f - 1)
    }

    /// Introduces the column `X_a + X_b`, substitutes it in every row holding
    /// both, then tries it as a forced pattern in rows holding exactly one.
    /// Returns the new column.
    pub fn apply_recurrence(&mut self, a: usize, b: usize) -> Result<usize> {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        if a == b || b >= self.columns.len() {
            return Err(Error::Precondition("pattern needs two distinct existing columns"));
        }
        let both: Vec<usize> = (0..self.rows.len())
            .filter(|&r| contains(&self.rows[r], a) && contains(&self.rows[r], b))
            .collect();
        if both.len() < 2 {
            return Err(Error::Precondition("pattern occurs in fewer than two rows"));
        }
        let tracked = self.pairs.is_some();
        if !tracked {
            self.init_pair_counts();
        }
        let (w0, c0) = (self.weight(), self.cost());
        let col = self.push_column(Column::Pattern(a, b));
        self.patterns.push(col);
        self.by_operand[a].push(col);
        self.by_operand[b].push(col);
        for &r in &both {
            let mut new: Vec<usize> = self.rows[r].iter().copied().filter(|&x| x != a && x != b).collect();
            new.push(col);
            self.set_row(r, new);
        }
        let mut forced = 0;
        if !self.config.recurrence_only {
            for r in 0..self.rows.len() {
                if self.force_pattern(r, a, b, col) {
                    forced += 1;
                }
            }
        }
        if !tracked {
            self.pairs = None;
        }
        self.record(
            TransformKind::Recurrence { a, b, column: col, forced },
            both.len() - 1,
            w0,
            c0,
        );
        Ok(col)
    }

    /// Tries to rewrite row `r`, which holds exactly one of `a` and `b`, by
    /// substituting `X_a = X_new + X_b` (or symmetrically) and collapsing
    /// previously identified patterns. The rewrite is kept unless the row
    /// gets heavier or a dependency cycle arises.
    pub fn force_pattern(&mut self, r: usize, a: usize, b: usize, new_col: usize) -> bool {
        let row = &self.rows[r];
        let (has_a, has_b) = (contains(row, a), contains(row, b));
        if has_a == has_b {
            return false;
        }
        let (present, absent) = if has_a { (a, b) } else { (b, a) };
        let mut cand = row.clone();
        toggle(&mut cand, present);
        toggle(&mut cand, absent);
        toggle(&mut cand, new_col);
        let mut work = vec![absent, new_col];
        while let Some(x) = work.pop() {
            if !contains(&cand, x) {
                continue;
            }
            if let Some((y, z)) = self.cancel_partner(&cand, x, present) {
                toggle(&mut cand, x);
                toggle(&mut cand, y);
                toggle(&mut cand, z);
                work.push(z);
            }
        }
        if cand.len() > self.rows[r].len() || cand == self.rows[r] {
            return false;
        }
        let fresh: Vec<usize> = cand.iter().copied().filter(|&x| !contains(&self.rows[r], x)).collect();
        if self.reaches(&fresh, &[], r) {
            return false;
        }
        self.set_row(r, cand);
        true
    }

    /// A column `y` in `row` with `x + y` equal to a single known column `z`,
    /// i.e. any two of `a`, `b` and `a + b` for an identified pattern. Newer
    /// patterns are tried first and `z` is never `avoid`.
    fn cancel_partner(&self, row: &[usize], x: usize, avoid: usize) -> Option<(usize, usize)> {
        for &q in self.by_operand[x].iter().rev() {
            let (u, v) = self.operands(q);
            let other = if u == x { v } else { u };
            if contains(row, other) {
                return Some((other, q));
            }
            if other != avoid && contains(row, q) {
                return Some((q, other));
            }
        }
        if let Column::Pattern(u, v) = self.columns[x] {
            if v != avoid && contains(row, u) {
                return Some((u, v));
            }
            if u != avoid && contains(row, v) {
                return Some((v, u));
            }
        }
        None
    }

    /// First row (in index order) holding a sum column `Y_i` together with a
    /// column that also appears in row `i`.
    pub fn find_reversal(&self) -> Option<(usize, usize, usize)> {
        for (r, row) in self.rows.iter().enumerate() {
            for &col in row {
                if let Column::Sum(i) = self.columns[col] {
                    if let Some(&j) = row.iter().find(|&&j| j != col && contains(&self.rows[i], j)) {
                        return Some((r, i, j));
                    }
                }
            }
        }
        None
    }

    /// A reversal pattern drawn uniformly from all present ones.
    fn draw_reversal(&mut self) -> Option<(usize, usize, usize)> {
        let mut all = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            for &col in row {
                if let Column::Sum(i) = self.columns[col] {
                    all.extend(row.iter().filter(|&&j| j != col && contains(&self.rows[i], j)).map(|&j| (r, i, j)));
                }
            }
        }
        pick(&mut self.rng, &all)
    }

    /// Undoes part of the differential transform behind `Y_i`: with
    /// `Z = Y_i - X_j`, row `i` becomes `Z + X_j` and row `r` uses `Z` in
    /// place of `Y_i + X_j`. Saves at least one addition.
    pub fn apply_reversal(&mut self, r: usize, i: usize, j: usize) -> Result<()> {
        let sum_i = self.sum_col.get(i).copied().flatten();
        let Some(sum_i) = sum_i else {
            return Err(Error::Precondition("row has no sum column"));
        };
        if !contains(&self.rows[r], sum_i) || !contains(&self.rows[r], j) || !contains(&self.rows[i], j) {
            return Err(Error::Precondition("not a reversal pattern"));
        }
        let with_sum = (0..self.rows.len()).filter(|&q| contains(&self.rows[q], sum_i));
        let mut together: BTreeMap<usize, usize> = BTreeMap::new();
        for q in with_sum {
            for &x in &self.rows[q] {
                if x != sum_i {
                    *together.entry(x).or_default() += 1;
                }
            }
        }
        if together.values().any(|&f| f >= 2) {
            return Err(Error::Precondition("another subexpression involving the sum recurs"));
        }
        let (w0, c0) = (self.weight(), self.cost());
        let z: Vec<usize> = self.rows[i].iter().copied().filter(|&x| x != j).collect();
        let mut new_r = self.rows[r].clone();
        toggle(&mut new_r, sum_i);
        toggle(&mut new_r, j);
        match z.len() {
            0 => {}
            1 => toggle(&mut new_r, z[0]),
            _ => {
                let aux = self.rows.len();
                self.rows.push(Vec::new());
                self.sum_col.push(None);
                self.set_row(aux, z);
                let aux_col = self.ensure_sum(aux);
                let mut new_i = vec![j, aux_col];
                new_i.sort_unstable();
                self.set_row(i, new_i);
                toggle(&mut new_r, aux_col);
            }
        }
        self.set_row(r, new_r);
        self.record(TransformKind::Reversal { row: r, sum_row: i, summand: j }, 1, w0, c0);
        Ok(())
    }

    /// Runs the configured algorithm to completion.
    pub fn optimize(&mut self) {
        match (self.config.strategy, self.config.algorithm) {
            (Strategy::Greedy, _) => self.run_greedy(),
            (Strategy::DifferentialFirst, Algorithm::Classic) => self.run_classic(),
            (Strategy::DifferentialFirst, Algorithm::Fast) => self.run_fast(),
        }
    }

    fn run_fast(&mut self) {
        if !self.config.recurrence_only {
            self.init_differential_array();
            while let Some((p, c)) = self.select_from_d() {
                self.apply_differential(p, c).expect("selected pair is eligible");
            }
            self.diff = None;
        }
        self.init_pair_counts();
        loop {
            while let Some((_, (a, b))) = self.select_pattern() {
                self.apply_recurrence(a, b).expect("ranked pattern recurs");
            }
            match self.draw_reversal() {
                Some((r, i, j)) => self.apply_reversal(r, i, j).expect("found reversal applies"),
                None => break,
            }
        }
        self.pairs = None;
    }

    fn classic_differential(&mut self) -> Option<(usize, usize)> {
        let window = self.differential_candidates(self.config.l_d);
        pick(&mut self.rng, &window).map(|(_, p, c)| (p, c))
    }

    fn run_classic(&mut self) {
        let mut skip_diff = self.config.recurrence_only;
        loop {
            if !skip_diff {
                while let Some((p, c)) = self.classic_differential() {
                    self.apply_differential(p, c).expect("candidate is eligible");
                }
            }
            skip_diff = self.config.recurrence_only;
            self.init_pair_counts();
            let choice = self.select_pattern();
            self.pairs = None;
            if let Some((_, (a, b))) = choice {
                self.apply_recurrence(a, b).expect("ranked pattern recurs");
                continue;
            }
            match self.draw_reversal() {
                Some((r, i, j)) => {
                    self.apply_reversal(r, i, j).expect("found reversal applies");
                    skip_diff = true;
                }
                None => break,
            }
        }
    }

    fn run_greedy(&mut self) {
        loop {
            let diff = if self.config.recurrence_only {
                Vec::new()
            } else {
                self.differential_candidates(self.config.l_d)
            };
            let s_d = diff.first().map_or(0, |c| c.0);
            self.init_pair_counts();
            let s_r = self.best_pattern_saving();
            if s_d > s_r {
                self.pairs = None;
                let (_, p, c) = pick(&mut self.rng, &diff).expect("nonempty window");
                self.apply_differential(p, c).expect("candidate is eligible");
            } else if s_r > 0 {
                let (_, (a, b)) = self.select_pattern().expect("positive saving");
                self.pairs = None;
                self.apply_recurrence(a, b).expect("ranked pattern recurs");
            } else {
                self.pairs = None;
                match self.draw_reversal() {
                    Some((r, i, j)) => self.apply_reversal(r, i, j).expect("found reversal applies"),
                    None => break,
                }
            }
        }
    }

    /// Row-level dependency edges `q -> r` (row `r` reads `Y_q`, directly or
    /// through patterns) are acyclic.
    pub fn is_acyclic(&self) -> bool {
        let n = self.rows.len();
        let deps: Vec<Vec<usize>> = (0..n)
            .map(|r| {
                let mut out = Vec::new();
                let mut stack = self.rows[r].clone();
                let mut seen = BTreeSet::new();
                while let Some(c) = stack.pop() {
                    if !seen.insert(c) {
                        continue;
                    }
                    match self.columns[c] {
                        Column::Input(_) => {}
                        Column::Sum(q) => out.push(q),
                        Column::Pattern(a, b) => stack.extend([a, b]),
                    }
                }
                out
            })
            .collect();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; n];
        for s in 0..n {
            if state[s] != 0 {
                continue;
            }
            let mut stack = vec![(s, 0usize)];
            state[s] = 1;
            while let Some(&mut (u, ref mut k)) = stack.last_mut() {
                if *k < deps[u].len() {
                    let v = deps[u][*k];
                    *k += 1;
                    match state[v] {
                        0 => {
                            state[v] = 1;
                            stack.push((v, 0));
                        }
                        1 => return false,
                        _ => {}
                    }
                } else {
                    state[u] = 2;
                    stack.pop();
                }
            }
        }
        true
    }

    /// Emits patterns in identification order and rows in index order, each
    /// after everything it reads.
    pub fn to_schedule(&self) -> Schedule {
        #[derive(Clone, Copy)]
        enum Node {
            Col(usize),
            Row(usize),
        }
        let mut col_slot: Vec<Option<Slot>> = vec![None; self.columns.len()];
        let mut row_slot: Vec<Option<Slot>> = vec![None; self.rows.len()];
        let mut steps: Vec<Step> = Vec::new();
        let add = |steps: &mut Vec<Step>, lhs: Slot, rhs: Slot| {
            steps.push(Step::Add { lhs, rhs });
            Slot::Temp(steps.len() - 1)
        };
        let roots = self
            .patterns
            .iter()
            .map(|&c| Node::Col(c))
            .chain((0..self.rows.len()).map(Node::Row));
        for root in roots {
            let mut stack = vec![(root, false)];
            while let Some((node, ready)) = stack.pop() {
                let done = match node {
                    Node::Col(c) => col_slot[c].is_some(),
                    Node::Row(r) => row_slot[r].is_some(),
                };
                if done {
                    continue;
                }
                match node {
                    Node::Col(c) => match self.columns[c] {
                        Column::Input(j) => col_slot[c] = Some(Slot::Input(j)),
                        Column::Pattern(a, b) => {
                            if ready {
                                let s = add(&mut steps, col_slot[a].unwrap(), col_slot[b].unwrap());
                                col_slot[c] = Some(s);
                            } else {
                                stack.push((node, true));
                                stack.push((Node::Col(b), false));
                                stack.push((Node::Col(a), false));
                            }
                        }
                        Column::Sum(q) => {
                            if ready {
                                col_slot[c] = row_slot[q];
                            } else {
                                stack.push((node, true));
                                stack.push((Node::Row(q), false));
                            }
                        }
                    },
                    Node::Row(r) => {
                        if ready {
                            let row = &self.rows[r];
                            let slot = match row.split_first() {
                                None => Slot::Zero,
                                Some((&first, rest)) => {
                                    let mut acc = col_slot[first].unwrap();
                                    for &c in rest {
                                        acc = add(&mut steps, acc, col_slot[c].unwrap());
                                    }
                                    acc
                                }
                            };
                            row_slot[r] = Some(slot);
                        } else {
                            stack.push((node, true));
                            for &c in self.rows[r].iter().rev() {
                                stack.push((Node::Col(c), false));
                            }
                        }
                    }
                }
            }
        }
        Schedule {
            n_inputs: self.n_inputs,
            steps,
            outputs: row_slot[..self.n_outputs].iter().map(|s| s.unwrap()).collect(),
            constants: Vec::new(),
        }
    }
}

/// Optimizes `Y = M X` and returns the final state with its schedule.
pub fn run_cse(m: &BinaryMatrix, config: &CseConfig) -> (OptState, Schedule) {
    let mut state = OptState::new(m, config.clone());
    state.optimize();
    let schedule = state.to_schedule();
    (state, schedule)
}

/// Best of `runs` seeded runs (`seed, seed + 1, ...`), ranked by cost then
/// seed.
pub fn best_of(m: &BinaryMatrix, config: &CseConfig, runs: usize) -> (OptState, Schedule) {
    (0..runs.max(1) as u64)
        .map(|k| run_cse(m, &CseConfig { seed: config.seed.wrapping_add(k), ..config.clone() }))
        .min_by_key(|(s, _)| s.cost())
        .expect("at least one run")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitmat::SymbolicSum;

    fn example() -> BinaryMatrix {
        BinaryMatrix::from_dense(&[
            [1u8, 0, 1, 1, 1],
            [1, 1, 1, 1, 1],
            [1, 1, 0, 1, 1],
            [0, 1, 1, 1, 0],
        ])
        .unwrap()
    }

    fn check_schedule(m: &BinaryMatrix, st: &OptState, s: &Schedule) {
        assert_eq!(s.execute_symbolic().unwrap(), m.mat_vec(&SymbolicSum::vars(m.n_cols())).unwrap());
        assert_eq!(s.additions(), st.cost());
    }

    #[test]
    fn saving_examples() {
        assert_eq!(differential_saving(&[0, 2, 3, 4], &[0, 1, 2, 3, 4]), 3);
        assert_eq!(differential_saving(&[1, 2, 3], &[1, 2, 3]), 2);
        assert_eq!(differential_saving(&[0, 1], &[2, 3]), 0);
    }

    #[test]
    fn worked_example_d_arrays() {
        let mut st = OptState::new(&example(), CseConfig::default());
        st.init_differential_array();
        assert_eq!(
            st.d_matrix().unwrap(),
            vec![vec![-1, 3, 1, 0], vec![2, -1, 2, 0], vec![1, 3, -1, 0], vec![0, 2, 0, -1]]
        );
        assert_eq!(st.weight(), 16);
        assert_eq!(st.apply_differential(0, 1), Ok(3));
        assert_eq!(st.row(1), &[1, 5]);
        assert_eq!(st.weight(), 13);
        assert!(st.is_cycle_inducing(1, 0));
        assert_eq!(
            st.d_matrix().unwrap(),
            vec![vec![-1, -1, 1, 0], vec![-1, -1, 2, 0], vec![1, 0, -1, 0], vec![0, 0, 0, -1]]
        );
        assert_eq!(st.snapshot(1, 2), Some(&[0, 1, 2, 3, 4][..]));
        assert_eq!(st.apply_differential(1, 2), Ok(2));
        assert_eq!(st.row(2), &[2, 6]);
        assert_eq!(st.weight(), 11);
        assert_eq!(
            st.d_matrix().unwrap(),
            vec![vec![-1, -1, 0, 0], vec![-1, -1, -1, 0], vec![-1, 0, -1, 0], vec![0, 0, 0, -1]]
        );
        let rec: Vec<_> = st.recurrence_savings().into_iter().filter(|&(_, s)| s > 0).collect();
        assert_eq!(rec, vec![((2, 3), 1)]);
        let col = st.apply_recurrence(2, 3).unwrap();
        assert_eq!(st.row(0), &[0, 4, col]);
        assert_eq!(st.row(3), &[1, col]);
        assert_eq!(st.cost(), 6);
        assert_eq!(st.find_reversal(), None);
        check_schedule(&example(), &st, &st.to_schedule());
    }

    #[test]
    fn run_reaches_six() {
        let best = (0..10)
            .map(|seed| run_cse(&example(), &CseConfig { seed, ..CseConfig::default() }).1.additions())
            .min();
        assert_eq!(best, Some(6));
    }

    #[test]
    fn forced_pattern_example() {
        // X4 = X1 + X2, X5 = X3 + X4 and X6 = X0 + X1 are known; forcing X6
        // on Y0 = X0 + X2 + X3 leaves X5 + X6
        let m = BinaryMatrix::from_rows(4, vec![vec![0, 2, 3]]).unwrap();
        let mut st = OptState::new(&m, CseConfig::default());
        for (a, b) in [(1, 2), (3, 4), (0, 1)] {
            let c = st.push_column(Column::Pattern(a, b));
            st.patterns.push(c);
            st.by_operand[a].push(c);
            st.by_operand[b].push(c);
        }
        assert!(st.force_pattern(0, 0, 1, 6));
        assert_eq!(st.row(0), &[5, 6]);
        check_schedule(&m, &st, &st.to_schedule());

        // the same end state through the recurrence steps
        let m = BinaryMatrix::from_rows(
            4,
            vec![vec![0, 2, 3], vec![1, 2], vec![1, 2, 3], vec![1, 2, 3], vec![0, 1], vec![0, 1]],
        )
        .unwrap();
        let mut st = OptState::new(&m, CseConfig::default());
        assert_eq!(st.apply_recurrence(1, 2), Ok(4));
        assert_eq!(st.apply_recurrence(3, 4), Ok(5));
        assert_eq!(st.apply_recurrence(0, 1), Ok(6));
        assert_eq!(st.row(0), &[5, 6]);
        let forced: usize = st
            .history()
            .iter()
            .map(|t| match t.kind {
                TransformKind::Recurrence { forced, .. } => forced,
                _ => 0,
            })
            .sum();
        assert!(forced >= 1);
        check_schedule(&m, &st, &st.to_schedule());
    }

    #[test]
    fn forced_pattern_not_committed_without_collapse() {
        let m = BinaryMatrix::from_rows(4, vec![vec![0, 2, 3], vec![0, 1], vec![0, 1]]).unwrap();
        let mut st = OptState::new(&m, CseConfig::default());
        st.apply_recurrence(0, 1).unwrap();
        assert_eq!(st.row(0), &[0, 2, 3]);
    }

    #[test]
    fn forced_pattern_through_a_sum() {
        // Y0 = X0 + X2 + X3, Y1 = X0 + X1 + X2, with patterns X2 + Y1 and
        // X3 + (X2 + Y1) known; forcing X0 + Y1 into row 0 collapses it to two
        // columns and makes row 0 read Y1
        let m = BinaryMatrix::from_rows(4, vec![vec![0, 2, 3], vec![0, 1, 2]]).unwrap();
        let setup = |row1: Option<Vec<usize>>| {
            let mut st = OptState::new(&m, CseConfig::default());
            let y1 = st.ensure_sum(1);
            let y0 = st.ensure_sum(0);
            let mut known = Vec::new();
            for (a, b) in [(2, y1), (3, y1 + 2), (0, y1)] {
                let c = st.push_column(Column::Pattern(a, b));
                st.patterns.push(c);
                st.by_operand[a].push(c);
                st.by_operand[b].push(c);
                known.push(c);
            }
            if let Some(r) = row1 {
                st.rows[1] = r.into_iter().map(|x| if x == usize::MAX { y0 } else { x }).collect();
            }
            (st, y1, known)
        };

        let (mut st, y1, known) = setup(None);
        assert!(st.force_pattern(0, 0, y1, known[2]));
        assert_eq!(st.row(0), &[known[1], known[2]]);
        assert!(st.is_acyclic());
        let s = st.to_schedule();
        assert_eq!(s.execute_symbolic().unwrap(), m.mat_vec(&SymbolicSum::vars(4)).unwrap());

        // with Y1 = Y0 + X1 + X3 the same rewrite would close a cycle
        let (mut st, y1, known) = setup(Some(vec![1, 3, usize::MAX]));
        assert!(!st.force_pattern(0, 0, y1, known[2]));
        assert_eq!(st.row(0), &[0, 2, 3]);
    }

    #[test]
    fn reversal_example() {
        // Y0 = X0 + X1 + X2 + X3, Y1 = X0 + X4 + X5 + Y0
        let m = BinaryMatrix::from_rows(6, vec![vec![0, 1, 2, 3], vec![1, 2, 3, 4, 5]]).unwrap();
        let mut st = OptState::new(&m, CseConfig::default());
        let y0 = st.ensure_sum(0);
        st.rows[1] = vec![0, 4, 5, y0];
        assert_eq!(st.cost(), 6);
        assert_eq!(st.find_reversal(), Some((1, 0, 0)));
        st.apply_reversal(1, 0, 0).unwrap();
        assert_eq!(st.cost(), 5);
        let z = st.sum_column(2).unwrap();
        assert_eq!(st.row(2), &[1, 2, 3]);
        assert_eq!(st.row(0), &[0, z]);
        assert_eq!(st.row(1), &[4, 5, z]);
        check_schedule(&m, &st, &st.to_schedule());
    }

    #[test]
    fn no_reversal_without_sums() {
        let st = OptState::new(&example(), CseConfig::default());
        assert_eq!(st.find_reversal(), None);
        let m = BinaryMatrix::from_rows(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let mut st = OptState::new(&m, CseConfig::default());
        let y0 = st.ensure_sum(0);
        st.rows[1] = vec![2, 3, y0];
        st.rows[1].sort_unstable();
        assert_eq!(st.find_reversal(), None);
    }

    #[test]
    fn reversal_refused_while_sum_pattern_recurs() {
        let m = BinaryMatrix::from_rows(6, vec![vec![0, 1, 2], vec![0, 3, 4], vec![3, 5]]).unwrap();
        let mut st = OptState::new(&m, CseConfig::default());
        let y0 = st.ensure_sum(0);
        st.rows[1] = vec![1, 2, 3, 4, y0];
        st.rows[2] = vec![3, 5, y0];
        assert!(st.apply_reversal(1, 0, 1).is_err());
    }

    #[test]
    fn recurrence_only_gives_seven() {
        let cfg = CseConfig { recurrence_only: true, ..CseConfig::default() };
        let best = (0..10).map(|seed| run_cse(&example(), &CseConfig { seed, ..cfg.clone() }).1.additions()).min();
        assert_eq!(best, Some(7));
    }

    #[test]
    fn identity_needs_nothing() {
        let (st, s) = run_cse(&BinaryMatrix::identity(6), &CseConfig::default());
        assert_eq!(st.cost(), 0);
        assert!(s.steps.is_empty());
    }

    #[test]
    fn every_mode_is_correct() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..40 {
            let rows = 3 + trial % 12;
            let cols = 3 + trial % 9;
            let dense: Vec<Vec<u8>> =
                (0..rows).map(|_| (0..cols).map(|_| rng.gen_bool(0.5) as u8).collect()).collect();
            let m = BinaryMatrix::from_dense(&dense).unwrap();
            for algorithm in [Algorithm::Fast, Algorithm::Classic] {
                for strategy in [Strategy::DifferentialFirst, Strategy::Greedy] {
                    for recurrence_only in [false, true] {
                        let cfg = CseConfig { algorithm, strategy, recurrence_only, seed: trial as u64, ..CseConfig::default() };
                        let (st, s) = run_cse(&m, &cfg);
                        check_schedule(&m, &st, &s);
                        assert!(st.is_acyclic());
                        assert!(st.cost() <= m.direct_add_count());
                    }
                }
            }
        }
    }
}
