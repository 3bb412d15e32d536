//! Ciphertext-only jigsaw attack on block-scrambled images.
//!
//! The solver sees only the scrambled image. It scores every ordered block pair by the
//! sum of squared differences across the shared boundary and grows an assembly from the
//! cheapest pair, Prim style. Recovery is measured by the direct (`Dc`), neighbor (`Nc`)
//! and largest-component (`Lc`) ratios.

use std::fmt;

use rayon::prelude::*;

use crate::augment::{augment_training, AugmentConfig};
use crate::error::{Error, Result};
use crate::image::{BlockGrid, BlockSpec, GridShape, Image, Permutation};
use crate::keyschedule::KeySet;
use crate::scalar::{cost_from_u64, ratio, CostScalar, MetricScalar};
use crate::scramble::{permutation_from_key, scramble};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    /// `b` sits immediately right of `a`.
    Right,
    /// `b` sits immediately below `a`.
    Below,
}

/// Boundary costs for every ordered pair of distinct blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct DissimilarityMatrix<C> {
    n: usize,
    right: Vec<C>,
    below: Vec<C>,
}

impl<C: CostScalar> DissimilarityMatrix<C> {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Cost of placing `b` on `side` of `a`; `None` when `a == b`.
    pub fn cost(&self, a: usize, b: usize, side: Side) -> Option<C> {
        (a != b).then(|| self.raw(a, b, side))
    }

    #[inline]
    fn raw(&self, a: usize, b: usize, side: Side) -> C {
        match side {
            Side::Right => self.right[a * self.n + b],
            Side::Below => self.below[a * self.n + b],
        }
    }
}

fn ssd(a: impl Iterator<Item = u8>, b: impl Iterator<Item = u8>) -> u64 {
    a.zip(b)
        .map(|(x, y)| {
            let d = x.abs_diff(y) as u64;
            d * d
        })
        .sum()
}

pub fn boundary_dissimilarity<C: CostScalar>(grid: &BlockGrid) -> Result<DissimilarityMatrix<C>> {
    let n = grid.len();
    if n < 2 {
        return Err(Error::NothingToAttack { blocks: n });
    }
    let spec = grid.spec();
    let (bx, by, ch) = (spec.block_width(), spec.block_height(), grid.channels());
    let tile_row = bx * ch;
    let last_col = |t: &[u8]| -> Vec<u8> {
        (0..by)
            .flat_map(|y| t[y * tile_row + (bx - 1) * ch..(y + 1) * tile_row].to_vec())
            .collect()
    };
    let first_col = |t: &[u8]| -> Vec<u8> {
        (0..by)
            .flat_map(|y| t[y * tile_row..y * tile_row + ch].to_vec())
            .collect()
    };
    let rights: Vec<Vec<u8>> = grid.blocks().iter().map(|t| last_col(t)).collect();
    let lefts: Vec<Vec<u8>> = grid.blocks().iter().map(|t| first_col(t)).collect();
    let bottoms: Vec<&[u8]> = grid
        .blocks()
        .iter()
        .map(|t| &t[(by - 1) * tile_row..])
        .collect();
    let tops: Vec<&[u8]> = grid.blocks().iter().map(|t| &t[..tile_row]).collect();

    let zero = C::zero();
    let mut right = vec![zero; n * n];
    let mut below = vec![zero; n * n];
    for a in 0..n {
        for b in (0..n).filter(|&b| b != a) {
            right[a * n + b] =
                cost_from_u64(ssd(rights[a].iter().copied(), lefts[b].iter().copied()));
            below[a * n + b] =
                cost_from_u64(ssd(bottoms[a].iter().copied(), tops[b].iter().copied()));
        }
    }
    Ok(DissimilarityMatrix { n, right, below })
}

/// Total boundary cost of an arrangement where grid slot `p` holds block `layout[p]`.
pub fn assembly_cost<C: CostScalar>(
    matrix: &DissimilarityMatrix<C>,
    shape: GridShape,
    layout: &[usize],
) -> C {
    let mut total = C::zero();
    for r in 0..shape.rows {
        for c in 0..shape.cols {
            let here = layout[shape.slot(r, c)];
            if c + 1 < shape.cols {
                total = total + matrix.raw(here, layout[shape.slot(r, c + 1)], Side::Right);
            }
            if r + 1 < shape.rows {
                total = total + matrix.raw(here, layout[shape.slot(r + 1, c)], Side::Below);
            }
        }
    }
    total
}

/// Result of a greedy reassembly.
#[derive(Clone, Debug, PartialEq)]
pub struct Assembly<C> {
    /// Estimated source slot of every scrambled block, comparable with the key's
    /// permutation.
    pub estimated: Permutation,
    /// [`assembly_cost`] of the final arrangement.
    pub cost: C,
}

impl<C> Assembly<C> {
    /// `layout[p]` = block placed at slot `p`.
    pub fn layout(&self) -> Vec<usize> {
        self.estimated.inverse().mapping().to_vec()
    }
}

/// Greedy placement on a canvas big enough for any `rows x cols` bounding box that
/// contains the seed cell.
struct Canvas {
    shape: GridShape,
    width: usize,
    cells: Vec<Option<usize>>,
    min_r: usize,
    max_r: usize,
    min_c: usize,
    max_c: usize,
}

impl Canvas {
    fn new(shape: GridShape) -> Self {
        let (h, w) = (2 * shape.rows - 1, 2 * shape.cols - 1);
        let (r0, c0) = (shape.rows - 1, shape.cols - 1);
        Self {
            shape,
            width: w,
            cells: vec![None; h * w],
            min_r: r0,
            max_r: r0,
            min_c: c0,
            max_c: c0,
        }
    }

    fn height(&self) -> usize {
        self.cells.len() / self.width
    }

    fn get(&self, r: usize, c: usize) -> Option<usize> {
        self.cells[r * self.width + c]
    }

    fn put(&mut self, r: usize, c: usize, block: usize) {
        self.cells[r * self.width + c] = Some(block);
        self.min_r = self.min_r.min(r);
        self.max_r = self.max_r.max(r);
        self.min_c = self.min_c.min(c);
        self.max_c = self.max_c.max(c);
    }

    fn fits(&self, r: usize, c: usize) -> bool {
        let rows = self.max_r.max(r) - self.min_r.min(r) + 1;
        let cols = self.max_c.max(c) - self.min_c.min(c) + 1;
        rows <= self.shape.rows && cols <= self.shape.cols
    }

    /// Empty cells next to a placed block whose use keeps the bounding box in range,
    /// in row-major order.
    fn frontier(&self) -> Vec<(usize, usize)> {
        let (h, w) = (self.height(), self.width);
        let mut out = Vec::new();
        for r in self.min_r.saturating_sub(1)..(self.max_r + 2).min(h) {
            for c in self.min_c.saturating_sub(1)..(self.max_c + 2).min(w) {
                if self.get(r, c).is_some() || !self.fits(r, c) {
                    continue;
                }
                let touches = (r > 0 && self.get(r - 1, c).is_some())
                    || (r + 1 < h && self.get(r + 1, c).is_some())
                    || (c > 0 && self.get(r, c - 1).is_some())
                    || (c + 1 < w && self.get(r, c + 1).is_some());
                if touches {
                    out.push((r, c));
                }
            }
        }
        out
    }

    /// Sum of boundary costs between `block` at `(r, c)` and its placed neighbors, with
    /// the neighbor count.
    fn attach_cost<C: CostScalar>(
        &self,
        m: &DissimilarityMatrix<C>,
        r: usize,
        c: usize,
        block: usize,
    ) -> (C, usize) {
        let (h, w) = (self.height(), self.width);
        let mut sum = C::zero();
        let mut k = 0;
        let mut add = |cost: C| {
            sum = sum + cost;
            k += 1;
        };
        if c > 0 {
            if let Some(left) = self.get(r, c - 1) {
                add(m.raw(left, block, Side::Right));
            }
        }
        if c + 1 < w {
            if let Some(right) = self.get(r, c + 1) {
                add(m.raw(block, right, Side::Right));
            }
        }
        if r > 0 {
            if let Some(up) = self.get(r - 1, c) {
                add(m.raw(up, block, Side::Below));
            }
        }
        if r + 1 < h {
            if let Some(down) = self.get(r + 1, c) {
                add(m.raw(block, down, Side::Below));
            }
        }
        (sum, k)
    }
}

/// `a / ka < b / kb` without division.
#[inline]
fn mean_less<C: CostScalar>(a: C, ka: usize, b: C, kb: usize) -> bool {
    let ka: C = C::from(ka).expect("small count");
    let kb: C = C::from(kb).expect("small count");
    a * kb < b * ka
}

/// Greedy reassembly from a precomputed cost matrix.
///
/// Seeds with the cheapest ordered pair (ties: lowest `a`, then lowest `b`, then `Right`
/// before `Below`), then repeatedly places the unplaced block with the lowest mean cost
/// against its placed neighbors at any frontier cell that keeps the assembly inside the
/// grid bounds. Ties go to the lowest block index, then the top-most, left-most cell.
pub fn greedy_assemble_matrix<C: CostScalar>(
    matrix: &DissimilarityMatrix<C>,
    shape: GridShape,
) -> Result<Assembly<C>> {
    let n = matrix.len();
    if n != shape.len() {
        return Err(Error::contract(format!(
            "cost matrix for {n} blocks does not match a {}x{} grid",
            shape.rows, shape.cols
        )));
    }
    if n < 2 {
        return Err(Error::NothingToAttack { blocks: n });
    }
    let sides: &[Side] = match (shape.cols > 1, shape.rows > 1) {
        (true, true) => &[Side::Right, Side::Below],
        (true, false) => &[Side::Right],
        _ => &[Side::Below],
    };
    let mut seed: Option<(C, usize, usize, Side)> = None;
    for a in 0..n {
        for b in (0..n).filter(|&b| b != a) {
            for &side in sides {
                let cost = matrix.raw(a, b, side);
                if seed.is_none_or(|(best, ..)| cost < best) {
                    seed = Some((cost, a, b, side));
                }
            }
        }
    }
    let (_, a, b, side) = seed.expect("n >= 2 gives at least one pair");

    let mut canvas = Canvas::new(shape);
    let mut placed = vec![false; n];
    let (r0, c0) = (shape.rows - 1, shape.cols - 1);
    canvas.put(r0, c0, a);
    match side {
        Side::Right => canvas.put(r0, c0 + 1, b),
        Side::Below => canvas.put(r0 + 1, c0, b),
    }
    placed[a] = true;
    placed[b] = true;

    for _ in 2..n {
        let frontier = canvas.frontier();
        let mut best: Option<(C, usize, usize, (usize, usize))> = None;
        for block in (0..n).filter(|&blk| !placed[blk]) {
            for &(r, c) in &frontier {
                let (sum, k) = canvas.attach_cost(matrix, r, c, block);
                let better = match best {
                    None => true,
                    Some((bs, bk, ..)) => mean_less(sum, k, bs, bk),
                };
                if better {
                    best = Some((sum, k, block, (r, c)));
                }
            }
        }
        let (_, _, block, (r, c)) = best.expect("frontier is never empty before the grid is full");
        canvas.put(r, c, block);
        placed[block] = true;
    }

    let mut estimated = vec![0; n];
    for r in canvas.min_r..=canvas.max_r {
        for c in canvas.min_c..=canvas.max_c {
            let block = canvas.get(r, c).expect("assembly fills its bounding box");
            estimated[block] = shape.slot(r - canvas.min_r, c - canvas.min_c);
        }
    }
    let estimated = Permutation::from_mapping_unchecked(estimated);
    let layout = estimated.inverse();
    let cost = assembly_cost(matrix, shape, layout.mapping());
    Ok(Assembly { estimated, cost })
}

/// Partitions `scrambled` and reassembles it greedily. The returned permutation gives
/// the estimated source slot of every scrambled block.
pub fn greedy_assemble<C: CostScalar>(scrambled: &Image, spec: BlockSpec) -> Result<Assembly<C>> {
    let grid = BlockGrid::partition(scrambled, spec)?;
    let matrix = boundary_dissimilarity::<C>(&grid)?;
    greedy_assemble_matrix(&matrix, grid.shape())
}

/// Direct, neighbor and largest-component recovery ratios, each in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttackReport<F> {
    pub dc: F,
    pub nc: F,
    pub lc: F,
}

impl<F: MetricScalar> AttackReport<F> {
    pub fn perfect() -> Self {
        Self {
            dc: F::one(),
            nc: F::one(),
            lc: F::one(),
        }
    }

    /// Arithmetic mean, accumulated in input order.
    pub fn mean(reports: &[Self]) -> Option<Self> {
        if reports.is_empty() {
            return None;
        }
        let n = F::from_usize(reports.len()).expect("count fits");
        let zero = Self {
            dc: F::zero(),
            nc: F::zero(),
            lc: F::zero(),
        };
        let sum = reports.iter().fold(zero, |acc, r| Self {
            dc: acc.dc + r.dc,
            nc: acc.nc + r.nc,
            lc: acc.lc + r.lc,
        });
        Some(Self {
            dc: sum.dc / n,
            nc: sum.nc / n,
            lc: sum.lc / n,
        })
    }
}

struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
    }

    fn largest(&mut self) -> usize {
        (0..self.parent.len())
            .map(|x| {
                let root = self.find(x);
                self.size[root]
            })
            .max()
            .unwrap_or(0)
    }
}

/// Compares an estimated block-to-source assignment with the truth.
///
/// `Dc` counts blocks at their true slot. `Nc` counts true horizontal and vertical
/// neighbor pairs that keep the same relative placement in the estimate (1 when the grid
/// has no neighbor pairs). `Lc` is the largest component connected by such pairs,
/// divided by the block count.
pub fn attack_metrics<F: MetricScalar>(
    truth: &Permutation,
    estimated: &Permutation,
    shape: GridShape,
) -> Result<AttackReport<F>> {
    let n = truth.len();
    if estimated.len() != n || shape.len() != n {
        return Err(Error::contract(format!(
            "metrics need equal lengths, got truth {n}, estimate {}, grid {}",
            estimated.len(),
            shape.len()
        )));
    }
    if n == 0 {
        return Err(Error::contract("metrics need at least one block"));
    }
    let direct = (0..n).filter(|&i| truth.get(i) == estimated.get(i)).count();

    let at_source = truth.inverse();
    let cols = shape.cols;
    let mut sets = DisjointSets::new(n);
    let (mut pairs, mut correct) = (0, 0);
    for p in 0..n {
        let (r, c) = shape.coords(p);
        let mut check = |q: usize, step: usize, wraps: bool| {
            pairs += 1;
            let (a, b) = (at_source.get(p), at_source.get(q));
            let ea = estimated.get(a);
            if !wraps && ea + step == estimated.get(b) {
                correct += 1;
                sets.union(a, b);
            }
        };
        if c + 1 < cols {
            let ea_col = estimated.get(at_source.get(p)) % cols;
            check(p + 1, 1, ea_col + 1 == cols);
        }
        if r + 1 < shape.rows {
            check(p + cols, cols, false);
        }
    }
    let nc = if pairs == 0 {
        F::one()
    } else {
        ratio(correct, pairs)
    };
    Ok(AttackReport {
        dc: ratio(direct, n),
        nc,
        lc: ratio(sets.largest(), n),
    })
}

/// Who reassembles the scrambled images in a sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Attacker {
    #[default]
    Greedy,
    /// The attacker holds the key. Every metric is 1 by construction.
    WithKey,
}

#[derive(Clone, Debug, Default)]
pub struct SweepOptions {
    pub attacker: Attacker,
    /// Training augmentation applied before scrambling.
    pub augment: Option<AugmentConfig>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepOutcome<F> {
    Report(AttackReport<F>),
    NothingToAttack,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow<F> {
    pub spec: BlockSpec,
    pub n_images: usize,
    pub outcome: SweepOutcome<F>,
}

impl<F: MetricScalar> fmt::Display for SweepRow<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "bx={} by={} ",
            self.spec.block_width(),
            self.spec.block_height()
        )?;
        match &self.outcome {
            SweepOutcome::Report(r) => write!(f, "dc={:.6} nc={:.6} lc={:.6} ", r.dc, r.nc, r.lc)?,
            SweepOutcome::NothingToAttack => write!(f, "error=NothingToAttack ")?,
        }
        write!(f, "n_images={}", self.n_images)
    }
}

fn attack_one<C: CostScalar, F: MetricScalar>(
    index: usize,
    image: &Image,
    spec: BlockSpec,
    keyset: &KeySet,
    options: &SweepOptions,
) -> Result<AttackReport<F>> {
    let shape = spec.check(image)?;
    let key = keyset.derive_attack_key(index as u64, spec);
    let truth = permutation_from_key(key, shape.len())?;
    if options.attacker == Attacker::WithKey {
        return attack_metrics(&truth, &truth, shape);
    }
    let plain = match &options.augment {
        Some(cfg) => augment_training(image, cfg, &mut keyset.training_augment_rng(0, index + 1))?,
        None => image.clone(),
    };
    let scrambled = scramble(&plain, key, spec)?;
    let assembly = greedy_assemble::<C>(&scrambled, spec)?;
    attack_metrics(&truth, &assembly.estimated, shape)
}

/// Scrambles every image under a fresh key per block size, attacks it and averages the
/// metrics. Block sizes that leave a single block produce a `NothingToAttack` row.
pub fn security_sweep<C: CostScalar, F: MetricScalar>(
    images: &[Image],
    block_sizes: &[BlockSpec],
    keyset: &KeySet,
    options: &SweepOptions,
) -> Result<Vec<SweepRow<F>>> {
    if images.is_empty() {
        return Err(Error::contract("security sweep needs at least one image"));
    }
    block_sizes
        .iter()
        .map(|&spec| {
            for img in images {
                spec.check(img)?;
            }
            let n_images = images.len();
            if images
                .iter()
                .any(|img| spec.check(img).map_or(true, |s| s.len() < 2))
            {
                return Ok(SweepRow {
                    spec,
                    n_images,
                    outcome: SweepOutcome::NothingToAttack,
                });
            }
            let reports: Vec<AttackReport<F>> = images
                .par_iter()
                .enumerate()
                .map(|(i, img)| attack_one::<C, F>(i, img, spec, keyset, options))
                .collect::<Result<_>>()?;
            let mean = AttackReport::mean(&reports).expect("non-empty");
            Ok(SweepRow {
                spec,
                n_images,
                outcome: SweepOutcome::Report(mean),
            })
        })
        .collect()
}
