use super::grid::{Grid, Topology};
use super::rule::NeighbourhoodRule;

/// Marker for sites that are never infected.
pub const NEVER: u32 = u32::MAX;

/// Per-site infection generation: 0 for the initial set, `k` for sites
/// added by the `k`-th application of the bootstrap operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfectionField {
    width: usize,
    height: usize,
    times: Vec<u32>,
}

impl InfectionField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn time(&self, x: usize, y: usize) -> Option<u32> {
        let t = self.times[y * self.width + x];
        (t != NEVER).then_some(t)
    }

    /// Last generation at which any site was infected.
    pub fn max_time(&self) -> Option<u32> {
        self.times.iter().copied().filter(|&t| t != NEVER).max()
    }

    pub fn raw(&self) -> &[u32] {
        &self.times
    }

    /// Checks the generation invariants against the initial set.
    pub fn is_consistent_with(&self, initial: &Grid, rule: &NeighbourhoodRule) -> bool {
        let r = rule.threshold() as usize;
        for y in 0..self.height {
            for x in 0..self.width {
                match self.time(x, y) {
                    Some(0) => {
                        if !initial.get(x, y) {
                            return false;
                        }
                    }
                    Some(k) => {
                        if initial.get(x, y) {
                            return false;
                        }
                        let earlier = rule
                            .offsets()
                            .iter()
                            .filter(|&&(dx, dy)| {
                                initial
                                    .resolve(x as i64 + dx as i64, y as i64 + dy as i64)
                                    .and_then(|(nx, ny)| self.time(nx, ny))
                                    .is_some_and(|t| t < k)
                            })
                            .count();
                        if earlier < r {
                            return false;
                        }
                    }
                    None => {
                        if initial.get(x, y) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Writes into `out` the row `src` shifted so that bit `x` of `out` is
/// bit `x + dx` of `src`.
fn shift_row(src: &[u64], dx: i64, width: usize, torus: bool, out: &mut [u64]) {
    if torus {
        let d = dx.rem_euclid(width as i64) as usize;
        if d == 0 {
            out.copy_from_slice(src);
            return;
        }
        let mut tmp = vec![0u64; out.len()];
        shift_row_zero(src, d as i64, out);
        shift_row_zero(src, d as i64 - width as i64, &mut tmp);
        for (o, t) in out.iter_mut().zip(&tmp) {
            *o |= t;
        }
    } else {
        shift_row_zero(src, dx, out);
    }
    let tail = width % 64;
    if tail != 0 {
        let last = out.len() - 1;
        out[last] &= (1u64 << tail) - 1;
    }
}

fn shift_row_zero(src: &[u64], dx: i64, out: &mut [u64]) {
    let n = src.len();
    let k = dx.unsigned_abs() as usize;
    let (q, r) = (k / 64, k % 64);
    for (i, o) in out.iter_mut().enumerate() {
        let word = |j: i64| -> u64 {
            if j >= 0 && (j as usize) < n {
                src[j as usize]
            } else {
                0
            }
        };
        *o = if dx >= 0 {
            let j = (i + q) as i64;
            let lo = word(j) >> r;
            let hi = if r == 0 { 0 } else { word(j + 1) << (64 - r) };
            lo | hi
        } else {
            let j = i as i64 - q as i64;
            let hi = word(j) << r;
            let lo = if r == 0 { 0 } else { word(j - 1) >> (64 - r) };
            hi | lo
        };
    }
}

/// One synchronous application of the bootstrap operator:
/// `S ∪ {v : |(v + N) ∩ S| ≥ r}`.
///
/// Rows are processed as packed words: each offset contributes a shifted
/// copy of a source row, and the threshold test is a bit-sliced
/// "at least k" accumulator.
pub fn bootstrap_step(grid: &Grid, rule: &NeighbourhoodRule) -> Grid {
    let (w, h) = (grid.width(), grid.height());
    let wpr = grid.words_per_row();
    let torus = grid.topology() == Topology::Torus;
    let r = rule.threshold() as usize;
    let mut out = grid.clone();
    let mut at_least = vec![vec![0u64; wpr]; r + 1];
    let mut shifted = vec![0u64; wpr];
    for y in 0..h {
        for plane in at_least.iter_mut() {
            plane.fill(0);
        }
        at_least[0].fill(u64::MAX);
        for &(dx, dy) in rule.offsets() {
            let sy = y as i64 + dy as i64;
            let src_y = if torus {
                sy.rem_euclid(h as i64) as usize
            } else if sy < 0 || sy >= h as i64 {
                continue;
            } else {
                sy as usize
            };
            shift_row(grid.row(src_y), dx as i64, w, torus, &mut shifted);
            for k in (1..=r).rev() {
                let (lower, upper) = at_least.split_at_mut(k);
                for ((u, l), s) in upper[0].iter_mut().zip(&lower[k - 1]).zip(&shifted) {
                    *u |= l & s;
                }
            }
        }
        let tail = grid.tail_mask();
        let row = out.row_mut(y);
        for (i, (o, a)) in row.iter_mut().zip(&at_least[r]).enumerate() {
            *o |= if i + 1 == wpr { a & tail } else { *a };
        }
    }
    out
}

/// Reference closure: repeat [`bootstrap_step`] until nothing changes.
/// Quadratic in the worst case; kept as an oracle for [`closure`].
pub fn closure_by_sweeps(grid: &Grid, rule: &NeighbourhoodRule) -> (Grid, InfectionField) {
    let mut times: Vec<u32> = (0..grid.len())
        .map(|i| {
            if grid.get(i % grid.width(), i / grid.width()) {
                0
            } else {
                NEVER
            }
        })
        .collect();
    let mut current = grid.clone();
    let mut generation = 0u32;
    loop {
        let next = bootstrap_step(&current, rule);
        if next == current {
            break;
        }
        generation += 1;
        for (x, y) in next.iter_occupied() {
            let t = &mut times[y * grid.width() + x];
            if *t == NEVER {
                *t = generation;
            }
        }
        current = next;
    }
    let field = InfectionField {
        width: grid.width(),
        height: grid.height(),
        times,
    };
    (current, field)
}

/// Reusable buffers for the frontier closure. Monte Carlo loops keep one
/// per worker to avoid reallocating per trial.
#[derive(Debug, Default, Clone)]
pub struct ClosureWorkspace {
    counts: Vec<u8>,
    times: Vec<u32>,
    frontier: Vec<u32>,
    next: Vec<u32>,
}

impl ClosureWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs the closure and leaves per-site generations in the workspace.
    /// Returns the number of infected sites.
    fn run(&mut self, grid: &Grid, rule: &NeighbourhoodRule) -> usize {
        let (w, h) = (grid.width(), grid.height());
        let n = w * h;
        assert!(n < u32::MAX as usize, "grid too large for the frontier closure");
        self.counts.clear();
        self.counts.resize(n, 0);
        self.times.clear();
        self.times.resize(n, NEVER);
        self.frontier.clear();
        for (x, y) in grid.iter_occupied() {
            let i = y * w + x;
            self.times[i] = 0;
            self.frontier.push(i as u32);
        }
        let mut infected = self.frontier.len();
        let threshold = rule.threshold() as u8;
        let torus = grid.topology() == Topology::Torus;
        // Site w gains a neighbour when v = w + o is infected, i.e. w = v - o.
        let back: Vec<(i64, i64)> = rule
            .offsets()
            .iter()
            .map(|&(dx, dy)| (-(dx as i64), -(dy as i64)))
            .collect();
        let (wi, hi) = (w as i64, h as i64);
        let mut generation = 0u32;
        while !self.frontier.is_empty() {
            generation += 1;
            self.next.clear();
            for &v in &self.frontier {
                let vx = (v as usize % w) as i64;
                let vy = (v as usize / w) as i64;
                for &(bx, by) in &back {
                    let (mut nx, mut ny) = (vx + bx, vy + by);
                    if torus {
                        nx = nx.rem_euclid(wi);
                        ny = ny.rem_euclid(hi);
                    } else if nx < 0 || nx >= wi || ny < 0 || ny >= hi {
                        continue;
                    }
                    let j = (ny * wi + nx) as usize;
                    if self.times[j] != NEVER {
                        continue;
                    }
                    let c = self.counts[j].saturating_add(1);
                    self.counts[j] = c;
                    if c >= threshold {
                        self.times[j] = generation;
                        self.next.push(j as u32);
                    }
                }
            }
            infected += self.next.len();
            std::mem::swap(&mut self.frontier, &mut self.next);
        }
        infected
    }

    /// Closure with per-site infection generations.
    pub fn closure(&mut self, grid: &Grid, rule: &NeighbourhoodRule) -> (Grid, InfectionField) {
        self.run(grid, rule);
        let mut out = Grid::new(grid.width(), grid.height(), grid.topology());
        for (i, &t) in self.times.iter().enumerate() {
            if t != NEVER {
                out.set(i % grid.width(), i / grid.width(), true);
            }
        }
        let field = InfectionField {
            width: grid.width(),
            height: grid.height(),
            times: self.times.clone(),
        };
        (out, field)
    }

    /// Whether the closure covers the whole grid.
    pub fn fills(&mut self, grid: &Grid, rule: &NeighbourhoodRule) -> bool {
        self.run(grid, rule) == grid.len()
    }

    /// Number of sites infected in the closure.
    pub fn closure_size(&mut self, grid: &Grid, rule: &NeighbourhoodRule) -> usize {
        self.run(grid, rule)
    }
}

/// Least fixpoint of the bootstrap operator containing `grid`, with
/// synchronous infection generations. Only neighbours of newly infected
/// sites are re-examined, so the cost is linear in `|N| · (sites infected)`.
pub fn closure(grid: &Grid, rule: &NeighbourhoodRule) -> (Grid, InfectionField) {
    ClosureWorkspace::new().closure(grid, rule)
}
