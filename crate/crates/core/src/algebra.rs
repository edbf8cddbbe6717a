//! Finite geometric modules over the integers and controlled morphisms
//! between them.
//!
//! A module is a finite index set with a position in `X x Y x N` and a rank
//! per index (the free module `Z^rank`). A morphism is a block-sparse matrix:
//! the block `(s, s')` has shape `rank(s') x rank(s)`. Zero blocks are never
//! stored, so equality of morphisms is structural.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

use crate::error::AlgebraError;

/// Finite metric space given by an integer distance matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricSpace {
    dist: Vec<Vec<u64>>,
}

impl MetricSpace {
    /// Checks the metric axioms on all pairs and triples.
    pub fn new(dist: Vec<Vec<u64>>) -> Result<Self, AlgebraError> {
        let n = dist.len();
        if dist.iter().any(|r| r.len() != n) {
            return Err(AlgebraError::Shape("distance matrix is not square".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if (i == j) != (dist[i][j] == 0) || dist[i][j] != dist[j][i] {
                    return Err(AlgebraError::Shape(format!("not a metric at ({i}, {j})")));
                }
                for k in 0..n {
                    if dist[i][k] > dist[i][j] + dist[j][k] {
                        return Err(AlgebraError::Shape(format!("triangle inequality fails at ({i}, {j}, {k})")));
                    }
                }
            }
        }
        Ok(MetricSpace { dist })
    }

    /// Path metric on `n` points.
    pub fn line(n: usize) -> Self {
        MetricSpace { dist: (0..n).map(|i| (0..n).map(|j| i.abs_diff(j) as u64).collect()).collect() }
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.dist[i][j]
    }

    /// Distance between two nonempty point sets; `None` if either is empty.
    pub fn set_distance(&self, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> Option<u64> {
        a.iter().flat_map(|&i| b.iter().map(move |&j| self.dist[i][j])).min()
    }
}

/// The control space `X x Y` (the level coordinate is carried by positions)
/// with optional subsets `A`, `B` of `Y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSpace {
    pub x: MetricSpace,
    pub y: MetricSpace,
    pub a: Option<BTreeSet<usize>>,
    pub b: Option<BTreeSet<usize>>,
}

impl SupportSpace {
    pub fn new(x: MetricSpace, y: MetricSpace) -> Self {
        SupportSpace { x, y, a: None, b: None }
    }

    /// Lines of `nx` and `ny` points.
    pub fn grid(nx: usize, ny: usize) -> Self {
        Self::new(MetricSpace::line(nx), MetricSpace::line(ny))
    }

    pub fn with_subsets(mut self, a: BTreeSet<usize>, b: BTreeSet<usize>) -> Self {
        self.a = Some(a);
        self.b = Some(b);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Position {
    pub x: usize,
    pub y: usize,
    pub level: u32,
}

/// Index set `0..len` with positions and ranks.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GeometricModule {
    pub positions: Vec<Position>,
    pub ranks: Vec<usize>,
}

impl GeometricModule {
    pub fn new(positions: Vec<Position>, ranks: Vec<usize>) -> Result<Self, AlgebraError> {
        if positions.len() != ranks.len() {
            return Err(AlgebraError::Shape(format!("{} positions for {} ranks", positions.len(), ranks.len())));
        }
        Ok(GeometricModule { positions, ranks })
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    fn check_in(&self, space: &SupportSpace) -> Result<(), AlgebraError> {
        match self.positions.iter().position(|p| p.x >= space.x.len() || p.y >= space.y.len()) {
            Some(i) => Err(AlgebraError::Shape(format!("index {i} is positioned outside the space"))),
            None => Ok(()),
        }
    }

    /// Sub-module on the given indices, in order.
    pub fn restrict(&self, keep: &[usize]) -> GeometricModule {
        GeometricModule {
            positions: keep.iter().map(|&i| self.positions[i]).collect(),
            ranks: keep.iter().map(|&i| self.ranks[i]).collect(),
        }
    }
}

/// Dense integer matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<i64>) -> Result<Self, AlgebraError> {
        if data.len() != rows * cols {
            return Err(AlgebraError::Shape(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "inner dimensions");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    fn add_assign(&mut self, other: &Matrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// Block-sparse morphism; `blocks[(s, t)]` maps the summand of source index
/// `s` to that of target index `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlledMorphism {
    pub source: GeometricModule,
    pub target: GeometricModule,
    blocks: BTreeMap<(usize, usize), Matrix>,
}

impl ControlledMorphism {
    pub fn zero(source: GeometricModule, target: GeometricModule) -> Self {
        ControlledMorphism { source, target, blocks: BTreeMap::new() }
    }

    pub fn identity(m: &GeometricModule) -> Self {
        let blocks = (0..m.len()).filter(|&i| m.ranks[i] > 0).map(|i| ((i, i), Matrix::identity(m.ranks[i]))).collect();
        ControlledMorphism { source: m.clone(), target: m.clone(), blocks }
    }

    /// Builds a morphism, checking block shapes and dropping zero blocks.
    pub fn from_blocks(
        source: GeometricModule,
        target: GeometricModule,
        blocks: impl IntoIterator<Item = ((usize, usize), Matrix)>,
    ) -> Result<Self, AlgebraError> {
        let mut f = Self::zero(source, target);
        for ((s, t), m) in blocks {
            f.set_block(s, t, m)?;
        }
        Ok(f)
    }

    pub fn set_block(&mut self, s: usize, t: usize, m: Matrix) -> Result<(), AlgebraError> {
        if s >= self.source.len() || t >= self.target.len() {
            return Err(AlgebraError::Shape(format!("block ({s}, {t}) is out of range")));
        }
        if (m.rows, m.cols) != (self.target.ranks[t], self.source.ranks[s]) {
            return Err(AlgebraError::Shape(format!(
                "block ({s}, {t}) is {}x{}, expected {}x{}",
                m.rows, m.cols, self.target.ranks[t], self.source.ranks[s]
            )));
        }
        if m.is_zero() {
            self.blocks.remove(&(s, t));
        } else {
            self.blocks.insert((s, t), m);
        }
        Ok(())
    }

    pub fn block(&self, s: usize, t: usize) -> Option<&Matrix> {
        self.blocks.get(&(s, t))
    }

    /// Nonzero blocks in `(source, target)` order.
    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &Matrix)> {
        self.blocks.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `self o f`: block `(s, u)` is the sum over `t` of `self(t, u) f(s, t)`.
    pub fn compose(&self, f: &ControlledMorphism) -> Result<ControlledMorphism, AlgebraError> {
        if f.target != self.source {
            return Err(AlgebraError::Shape("composition: target and source differ".into()));
        }
        let mut by_source: BTreeMap<usize, Vec<(usize, &Matrix)>> = BTreeMap::new();
        for (&(t, u), m) in &self.blocks {
            by_source.entry(t).or_default().push((u, m));
        }
        let mut acc: BTreeMap<(usize, usize), Matrix> = BTreeMap::new();
        for (&(s, t), fm) in &f.blocks {
            for &(u, gm) in by_source.get(&t).map(Vec::as_slice).unwrap_or(&[]) {
                let p = gm.mul(fm);
                acc.entry((s, u)).and_modify(|m| m.add_assign(&p)).or_insert(p);
            }
        }
        acc.retain(|_, m| !m.is_zero());
        Ok(ControlledMorphism { source: f.source.clone(), target: self.target.clone(), blocks: acc })
    }

    pub fn add(&self, other: &ControlledMorphism) -> Result<ControlledMorphism, AlgebraError> {
        if self.source != other.source || self.target != other.target {
            return Err(AlgebraError::Shape("sum of morphisms between different modules".into()));
        }
        let mut blocks = self.blocks.clone();
        for (k, m) in &other.blocks {
            blocks.entry(*k).and_modify(|b| b.add_assign(m)).or_insert_with(|| m.clone());
        }
        blocks.retain(|_, m| !m.is_zero());
        Ok(ControlledMorphism { source: self.source.clone(), target: self.target.clone(), blocks })
    }

    /// Keeps the blocks satisfying the predicate.
    pub fn filter(&self, keep: impl Fn(usize, usize) -> bool) -> ControlledMorphism {
        let blocks = self.blocks.iter().filter(|((s, t), _)| keep(*s, *t)).map(|(k, m)| (*k, m.clone())).collect();
        ControlledMorphism { source: self.source.clone(), target: self.target.clone(), blocks }
    }

    /// First block (in canonical order) where the two morphisms differ.
    pub fn first_difference(&self, other: &ControlledMorphism) -> Option<(usize, usize)> {
        let keys: BTreeSet<&(usize, usize)> = self.blocks.keys().chain(other.blocks.keys()).collect();
        keys.into_iter().find(|k| self.blocks.get(k) != other.blocks.get(k)).copied()
    }

    fn propagation_by(&self, d: impl Fn(&Position, &Position) -> u64) -> u64 {
        self.blocks
            .keys()
            .map(|&(s, t)| d(&self.source.positions[s], &self.target.positions[t]))
            .max()
            .unwrap_or(0)
    }

    pub fn propagation_x(&self, space: &SupportSpace) -> u64 {
        self.propagation_by(|a, b| space.x.get(a.x, b.x))
    }

    pub fn propagation_y(&self, space: &SupportSpace) -> u64 {
        self.propagation_by(|a, b| space.y.get(a.y, b.y))
    }

    /// Propagation for the max metric on `X x Y`.
    pub fn propagation(&self, space: &SupportSpace) -> u64 {
        self.propagation_x(space).max(self.propagation_y(space))
    }

    /// Largest `Y`-distance of a block whose source sits at each level.
    pub fn level_profile(&self, space: &SupportSpace) -> BTreeMap<u32, u64> {
        let mut out: BTreeMap<u32, u64> = BTreeMap::new();
        for &(s, t) in self.blocks.keys() {
            let (a, b) = (&self.source.positions[s], &self.target.positions[t]);
            let e = out.entry(a.level).or_default();
            *e = (*e).max(space.y.get(a.y, b.y));
        }
        out
    }

    /// Counts blocks violating `g.phi(s, t) = phi(g s, g t)` for a deck
    /// action given by index permutations of source and target.
    pub fn equivariance_defects(&self, on_source: &[usize], on_target: &[usize]) -> Result<usize, AlgebraError> {
        if on_source.len() != self.source.len() || on_target.len() != self.target.len() {
            return Err(AlgebraError::Shape("action does not match the modules".into()));
        }
        let keys: BTreeSet<(usize, usize)> = self
            .blocks
            .keys()
            .flat_map(|&(s, t)| [(s, t), (on_source[s], on_target[t])])
            .collect();
        Ok(keys
            .iter()
            .filter(|&&(s, t)| self.blocks.get(&(s, t)) != self.blocks.get(&(on_source[s], on_target[t])))
            .count())
    }
}

/// Level discipline: the per-level `Y`-propagation never increases.
pub fn level_nonincreasing(profile: &BTreeMap<u32, u64>) -> bool {
    profile.values().zip(profile.values().skip(1)).all(|(a, b)| b <= a)
}

/// Direct-sum decomposition over a subset of `Y` with its structure maps.
#[derive(Debug, Clone)]
pub struct Split {
    pub part: GeometricModule,
    pub rest: GeometricModule,
    /// Original indices of `part` and `rest`.
    pub part_indices: Vec<usize>,
    pub rest_indices: Vec<usize>,
    pub incl_part: ControlledMorphism,
    pub proj_part: ControlledMorphism,
    pub incl_rest: ControlledMorphism,
    pub proj_rest: ControlledMorphism,
}

fn inclusion(whole: &GeometricModule, part: &GeometricModule, indices: &[usize]) -> ControlledMorphism {
    let blocks = indices
        .iter()
        .enumerate()
        .filter(|&(_, &i)| whole.ranks[i] > 0)
        .map(|(k, &i)| ((k, i), Matrix::identity(whole.ranks[i])))
        .collect();
    ControlledMorphism { source: part.clone(), target: whole.clone(), blocks }
}

fn transpose_blocks(f: &ControlledMorphism) -> ControlledMorphism {
    let blocks = f.blocks.iter().map(|(&(s, t), m)| ((t, s), m.clone())).collect();
    ControlledMorphism { source: f.target.clone(), target: f.source.clone(), blocks }
}

/// Splits `m` into the summand positioned in `subset` and the rest.
pub fn split_over(m: &GeometricModule, subset: &BTreeSet<usize>) -> Split {
    let (part_indices, rest_indices): (Vec<usize>, Vec<usize>) =
        (0..m.len()).partition(|&i| subset.contains(&m.positions[i].y));
    let part = m.restrict(&part_indices);
    let rest = m.restrict(&rest_indices);
    let incl_part = inclusion(m, &part, &part_indices);
    let incl_rest = inclusion(m, &rest, &rest_indices);
    Split {
        proj_part: transpose_blocks(&incl_part),
        proj_rest: transpose_blocks(&incl_rest),
        part,
        rest,
        part_indices,
        rest_indices,
        incl_part,
        incl_rest,
    }
}

/// `phi = second o first` through `middle`.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub middle: GeometricModule,
    pub first: ControlledMorphism,
    pub second: ControlledMorphism,
}

impl Factorization {
    pub fn compose(&self) -> Result<ControlledMorphism, AlgebraError> {
        self.second.compose(&self.first)
    }

    pub fn middle_within(&self, subset: &BTreeSet<usize>) -> bool {
        self.middle.positions.iter().all(|p| subset.contains(&p.y))
    }
}

/// The four pieces `phi_ij` (source class `i`, target class `j`, class 0 =
/// `A \ B`, class 1 = `A n B`) and factorizations of `phi_01`, `phi_10` and
/// `phi_11` through modules positioned in `A n B`.
#[derive(Debug, Clone)]
pub struct FourBlocks {
    pub pieces: [[ControlledMorphism; 2]; 2],
    pub through_intersection: [Factorization; 3],
}

pub fn four_block_decompose(
    phi: &ControlledMorphism,
    a0: &BTreeSet<usize>,
    a1: &BTreeSet<usize>,
) -> Result<FourBlocks, AlgebraError> {
    let class = |p: &Position| -> Result<usize, AlgebraError> {
        if a0.contains(&p.y) {
            Ok(0)
        } else if a1.contains(&p.y) {
            Ok(1)
        } else {
            Err(AlgebraError::Shape(format!("position {p:?} is outside A")))
        }
    };
    let src: Vec<usize> = phi.source.positions.iter().map(class).collect::<Result<_, _>>()?;
    let tgt: Vec<usize> = phi.target.positions.iter().map(class).collect::<Result<_, _>>()?;
    let piece = |i: usize, j: usize| phi.filter(|s, t| src[s] == i && tgt[t] == j);
    let pieces = [[piece(0, 0), piece(0, 1)], [piece(1, 0), piece(1, 1)]];
    let s1 = split_over(&phi.source, a1);
    let t1 = split_over(&phi.target, a1);
    // phi_01 through the target restricted to A n B
    let via_target = |f: &ControlledMorphism| -> Result<Factorization, AlgebraError> {
        Ok(Factorization { middle: t1.part.clone(), first: t1.proj_part.compose(f)?, second: t1.incl_part.clone() })
    };
    // phi_10 and phi_11 through the source restricted to A n B
    let via_source = |f: &ControlledMorphism| -> Result<Factorization, AlgebraError> {
        Ok(Factorization { middle: s1.part.clone(), first: s1.proj_part.clone(), second: f.compose(&s1.incl_part)? })
    };
    let through_intersection = [via_target(&pieces[0][1])?, via_source(&pieces[1][0])?, via_source(&pieces[1][1])?];
    Ok(FourBlocks { pieces, through_intersection })
}

/// Output of the gaining-control construction.
#[derive(Debug, Clone)]
pub struct GainedControl {
    /// `T'`: pairs `(s, t)` with `psi(s, t) != 0`.
    pub pairs_first: Vec<(usize, usize)>,
    /// `T''`: pairs `(t, s')` with `chi(t, s') != 0`.
    pub pairs_second: Vec<(usize, usize)>,
    pub psi: ControlledMorphism,
    pub phi: ControlledMorphism,
    pub chi: ControlledMorphism,
}

impl GainedControl {
    pub fn compose(&self) -> Result<ControlledMorphism, AlgebraError> {
        self.chi.compose(&self.phi)?.compose(&self.psi)
    }
}

/// Checks `chi o psi = phi`, reporting the first differing block.
pub fn check_factorization(
    phi: &ControlledMorphism,
    psi: &ControlledMorphism,
    chi: &ControlledMorphism,
) -> Result<(), AlgebraError> {
    if psi.source != phi.source || chi.target != phi.target {
        return Err(AlgebraError::Shape("factorization has the wrong ends".into()));
    }
    let c = chi.compose(psi)?;
    match c.first_difference(phi) {
        Some((s, t)) => Err(AlgebraError::NotAFactorization { source_index: s, target: t }),
        None => Ok(()),
    }
}

/// Replaces the middle object `T` of `phi = chi o psi` by
/// `T' = {(s, t) : psi(s, t) != 0}` at `(x(s), y(t), level(s))` and
/// `T'' = {(t, s') : chi(t, s') != 0}` at `(x(s'), y(t), level(s'))`, with
/// `phi' = id` on `(s, t) -> (t, s')` when `phi(s, s') != 0`.
pub fn regain_control(
    phi: &ControlledMorphism,
    psi: &ControlledMorphism,
    chi: &ControlledMorphism,
) -> Result<GainedControl, AlgebraError> {
    check_factorization(phi, psi, chi)?;
    let mid = &psi.target;
    let pairs_first: Vec<(usize, usize)> = psi.blocks.keys().copied().collect();
    let pairs_second: Vec<(usize, usize)> = chi.blocks.keys().copied().collect();
    let t1 = GeometricModule {
        positions: pairs_first
            .iter()
            .map(|&(s, t)| Position { x: phi.source.positions[s].x, y: mid.positions[t].y, level: phi.source.positions[s].level })
            .collect(),
        ranks: pairs_first.iter().map(|&(_, t)| mid.ranks[t]).collect(),
    };
    let t2 = GeometricModule {
        positions: pairs_second
            .iter()
            .map(|&(t, s)| Position { x: phi.target.positions[s].x, y: mid.positions[t].y, level: phi.target.positions[s].level })
            .collect(),
        ranks: pairs_second.iter().map(|&(t, _)| mid.ranks[t]).collect(),
    };
    let psi1 = ControlledMorphism {
        source: phi.source.clone(),
        target: t1.clone(),
        blocks: pairs_first.iter().enumerate().map(|(k, &(s, t))| ((s, k), psi.blocks[&(s, t)].clone())).collect(),
    };
    let chi1 = ControlledMorphism {
        source: t2.clone(),
        target: phi.target.clone(),
        blocks: pairs_second.iter().enumerate().map(|(k, &(t, s))| ((k, s), chi.blocks[&(t, s)].clone())).collect(),
    };
    let mut by_t: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (k, &(t, s)) in pairs_second.iter().enumerate() {
        by_t.entry(t).or_default().push((k, s));
    }
    let mut blocks = BTreeMap::new();
    for (i, &(s, t)) in pairs_first.iter().enumerate() {
        for &(k, s2) in by_t.get(&t).map(Vec::as_slice).unwrap_or(&[]) {
            if phi.blocks.contains_key(&(s, s2)) && mid.ranks[t] > 0 {
                blocks.insert((i, k), Matrix::identity(mid.ranks[t]));
            }
        }
    }
    let phi1 = ControlledMorphism { source: t1, target: t2, blocks };
    Ok(GainedControl { pairs_first, pairs_second, psi: psi1, phi: phi1, chi: chi1 })
}

/// The four directional bounds of the gaining-control construction.
#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct ControlBounds {
    pub psi_x: u64,
    pub psi_y: u64,
    pub chi_x: u64,
    pub chi_y: u64,
    pub phi_x: u64,
    pub phi_y: u64,
    pub holds: bool,
}

pub fn control_bounds(
    space: &SupportSpace,
    phi: &ControlledMorphism,
    psi: &ControlledMorphism,
    chi: &ControlledMorphism,
    gained: &GainedControl,
) -> ControlBounds {
    let b = ControlBounds {
        psi_x: gained.psi.propagation_x(space),
        psi_y: gained.psi.propagation_y(space),
        chi_x: gained.chi.propagation_x(space),
        chi_y: gained.chi.propagation_y(space),
        phi_x: gained.phi.propagation_x(space),
        phi_y: gained.phi.propagation_y(space),
        holds: false,
    };
    let holds = b.psi_x == 0
        && b.chi_x == 0
        && b.psi_y <= psi.propagation_y(space)
        && b.chi_y <= chi.propagation_y(space)
        && b.phi_x <= phi.propagation_x(space)
        && b.phi_y == 0;
    ControlBounds { holds, ..b }
}

/// Audit of the excision rewiring.
#[derive(Debug, Clone, Serialize)]
pub struct ExcisionReport {
    pub separation: Option<u64>,
    /// Middle indices kept for `phi_00`.
    pub middle: Vec<usize>,
    /// Kept middle indices positioned outside `A n B`.
    pub escapes: Vec<usize>,
    /// `phi_00` factors through the restricted middle.
    pub phi00_factors: bool,
    /// `phi` factors through a module positioned in `A n B`.
    pub phi_factors: bool,
    /// `Y`-propagation of the assembled factorization's two maps.
    pub propagation_y: (u64, u64),
}

impl ExcisionReport {
    pub fn certified(&self) -> bool {
        self.escapes.is_empty() && self.phi00_factors && self.phi_factors
    }
}

/// Direct sum of factorizations of morphisms with common ends.
fn sum_factorizations(parts: &[Factorization]) -> Result<Factorization, AlgebraError> {
    let source = parts[0].first.source.clone();
    let target = parts[0].second.target.clone();
    let mut middle = GeometricModule::default();
    let mut first = BTreeMap::new();
    let mut second = BTreeMap::new();
    for f in parts {
        let off = middle.len();
        middle.positions.extend(&f.middle.positions);
        middle.ranks.extend(&f.middle.ranks);
        first.extend(f.first.blocks.iter().map(|(&(s, t), m)| ((s, t + off), m.clone())));
        second.extend(f.second.blocks.iter().map(|(&(t, u), m)| ((t + off, u), m.clone())));
    }
    Ok(Factorization {
        first: ControlledMorphism { source, target: middle.clone(), blocks: first },
        second: ControlledMorphism { source: middle.clone(), target, blocks: second },
        middle,
    })
}

/// Replays the excision argument without checking its hypotheses:
/// restricts the middle of `phi_00 = chi_0 o psi_0` to the indices it uses
/// and records where they sit.
pub fn rewire_excision(
    space: &SupportSpace,
    phi: &ControlledMorphism,
    psi: &ControlledMorphism,
    chi: &ControlledMorphism,
) -> Result<ExcisionReport, AlgebraError> {
    let (Some(a), Some(b)) = (&space.a, &space.b) else {
        return Err(AlgebraError::Shape("the space has no designated A and B".into()));
    };
    check_factorization(phi, psi, chi)?;
    let a0: BTreeSet<usize> = a.difference(b).copied().collect();
    let a1: BTreeSet<usize> = a.intersection(b).copied().collect();
    let blocks = four_block_decompose(phi, &a0, &a1)?;
    let in_a0 = |p: &Position| a0.contains(&p.y);
    let psi0 = psi.filter(|s, _| in_a0(&phi.source.positions[s]));
    let chi0 = chi.filter(|_, t| in_a0(&phi.target.positions[t]));
    let used: BTreeSet<usize> =
        psi0.blocks.keys().map(|&(_, t)| t).chain(chi0.blocks.keys().map(|&(t, _)| t)).collect();
    let middle: Vec<usize> = used.into_iter().collect();
    let escapes: Vec<usize> = middle.iter().copied().filter(|&t| !a1.contains(&psi.target.positions[t].y)).collect();
    let m = split_by_indices(&psi.target, &middle);
    let first = m.1.compose(&psi0)?;
    let second = chi0.compose(&m.0)?;
    let f00 = Factorization { middle: psi.target.restrict(&middle), first, second };
    let phi00_factors = f00.compose()? == blocks.pieces[0][0];
    let [f01, f10, f11] = blocks.through_intersection.clone();
    let total = sum_factorizations(&[f00, f01, f10, f11])?;
    let phi_factors = total.compose()? == *phi && total.middle_within(&a1);
    Ok(ExcisionReport {
        separation: space.y.set_distance(&a0, &b.difference(a).copied().collect()),
        middle,
        escapes,
        phi00_factors,
        phi_factors,
        propagation_y: (total.first.propagation_y(space), total.second.propagation_y(space)),
    })
}

/// Inclusion of and projection onto the summand on `indices`.
fn split_by_indices(m: &GeometricModule, indices: &[usize]) -> (ControlledMorphism, ControlledMorphism) {
    let part = m.restrict(indices);
    let incl = inclusion(m, &part, indices);
    let proj = transpose_blocks(&incl);
    (incl, proj)
}

/// Checks the hypotheses (ends of `phi` positioned in `A`, middle in `B`,
/// separation above `R`, `Y`-propagation of `psi` and `chi` below `R`) and
/// then audits the rewiring.
pub fn verify_excision_rewiring(
    space: &SupportSpace,
    phi: &ControlledMorphism,
    psi: &ControlledMorphism,
    chi: &ControlledMorphism,
    radius: u64,
) -> Result<ExcisionReport, AlgebraError> {
    let (Some(a), Some(b)) = (&space.a, &space.b) else {
        return Err(AlgebraError::Shape("the space has no designated A and B".into()));
    };
    let within = |m: &GeometricModule, set: &BTreeSet<usize>| m.positions.iter().all(|p| set.contains(&p.y));
    if !within(&phi.source, a) || !within(&phi.target, a) {
        return Err(AlgebraError::Shape("phi is not supported in A".into()));
    }
    if !within(&psi.target, b) {
        return Err(AlgebraError::Shape("the middle object is not supported in B".into()));
    }
    let a0: BTreeSet<usize> = a.difference(b).copied().collect();
    let b0: BTreeSet<usize> = b.difference(a).copied().collect();
    if let Some(sep) = space.y.set_distance(&a0, &b0) {
        if sep <= radius {
            return Err(AlgebraError::Separation { separation: sep, radius });
        }
    }
    for f in [psi, chi] {
        let p = f.propagation_y(space);
        if p >= radius {
            return Err(AlgebraError::Propagation { propagation: p, radius });
        }
    }
    rewire_excision(space, phi, psi, chi)
}

/// Filtration axioms for the propagation filtration on a family of
/// morphisms and the composable pairs among them.
#[derive(Debug, Clone, Default, Serialize)]
pub struct FiltrationReport {
    pub morphisms: usize,
    pub pairs: usize,
    /// `F_e` is contained in `F_e'` for `e <= e'`: a morphism of
    /// propagation `p` lies in every `F_e` with `e >= p` and in none below.
    pub monotone: bool,
    /// Every morphism has finite propagation.
    pub exhaustive: bool,
    pub identities_zero: bool,
    pub composition_additive: bool,
    pub sums_bounded: bool,
}

impl FiltrationReport {
    pub fn holds(&self) -> bool {
        self.monotone && self.exhaustive && self.identities_zero && self.composition_additive && self.sums_bounded
    }
}

pub fn check_filtration(space: &SupportSpace, morphisms: &[ControlledMorphism]) -> FiltrationReport {
    let mut r = FiltrationReport {
        morphisms: morphisms.len(),
        monotone: true,
        exhaustive: true,
        identities_zero: true,
        composition_additive: true,
        sums_bounded: true,
        ..Default::default()
    };
    let controlled = |f: &ControlledMorphism, e: u64| {
        f.blocks.keys().all(|&(s, t)| {
            let (a, b) = (&f.source.positions[s], &f.target.positions[t]);
            space.x.get(a.x, b.x).max(space.y.get(a.y, b.y)) <= e
        })
    };
    for f in morphisms {
        let p = f.propagation(space);
        r.monotone &= controlled(f, p) && controlled(f, p + 1) && (p == 0 || !controlled(f, p - 1));
        r.exhaustive &= f.blocks.len() <= f.source.len() * f.target.len();
        r.identities_zero &= ControlledMorphism::identity(&f.source).propagation(space) == 0;
        for g in morphisms {
            if g.source == f.target {
                r.pairs += 1;
                let c = g.compose(f).expect("composable");
                r.composition_additive &= c.propagation(space) <= p + g.propagation(space);
            }
            if g.source == f.source && g.target == f.target {
                let s = f.add(g).expect("same ends");
                r.sums_bounded &= s.propagation(space) <= p.max(g.propagation(space));
            }
        }
    }
    r
}

// ----- random instances -----

/// Random module of `n` indices positioned uniformly in the space (level 0
/// to `levels - 1`) with ranks in `0..=max_rank`.
pub fn random_module<R: Rng>(rng: &mut R, space: &SupportSpace, n: usize, max_rank: usize, levels: u32) -> GeometricModule {
    GeometricModule {
        positions: (0..n)
            .map(|_| Position {
                x: rng.gen_range(0..space.x.len()),
                y: rng.gen_range(0..space.y.len()),
                level: rng.gen_range(0..levels.max(1)),
            })
            .collect(),
        ranks: (0..n).map(|_| rng.gen_range(0..=max_rank)).collect(),
    }
}

/// Random morphism: each block is present with probability `density` when
/// `allowed(s, t)` holds, with entries in `-2..=2`.
pub fn random_morphism<R: Rng>(
    rng: &mut R,
    source: &GeometricModule,
    target: &GeometricModule,
    density: f64,
    allowed: impl Fn(&Position, &Position) -> bool,
) -> ControlledMorphism {
    let mut f = ControlledMorphism::zero(source.clone(), target.clone());
    for s in 0..source.len() {
        for t in 0..target.len() {
            if !allowed(&source.positions[s], &target.positions[t]) || !rng.gen_bool(density) {
                continue;
            }
            let (r, c) = (target.ranks[t], source.ranks[s]);
            let m = Matrix { rows: r, cols: c, data: (0..r * c).map(|_| rng.gen_range(-2..=2)).collect() };
            f.set_block(s, t, m).expect("shapes match");
        }
    }
    f
}

/// `phi := chi o psi` with `psi: S -> T`, `chi: T -> S'`.
#[derive(Debug, Clone)]
pub struct FactorizationInstance {
    pub phi: ControlledMorphism,
    pub psi: ControlledMorphism,
    pub chi: ControlledMorphism,
}

/// Random factorization over `space` with modules of `n` indices; blocks
/// of `psi` and `chi` are allowed only within `Y`-distance `reach`.
pub fn random_factorization<R: Rng>(
    rng: &mut R,
    space: &SupportSpace,
    n: usize,
    reach: u64,
) -> FactorizationInstance {
    let s = random_module(rng, space, n, 3, 3);
    let t = random_module(rng, space, n, 3, 3);
    let u = random_module(rng, space, n, 3, 3);
    let near = |a: &Position, b: &Position| space.y.get(a.y, b.y) <= reach;
    let psi = random_morphism(rng, &s, &t, 0.3, near);
    let chi = random_morphism(rng, &t, &u, 0.3, near);
    let phi = chi.compose(&psi).expect("composable");
    FactorizationInstance { phi, psi, chi }
}

/// Line of 16 points with `A = [0, 9)` and `B = [6, 16)`, so that
/// `d(A \ B, B \ A) = 4`; compliant instances use `R = 3`.
pub fn excision_space() -> SupportSpace {
    SupportSpace::grid(3, 16).with_subsets((0..9).collect(), (6..16).collect())
}

pub const EXCISION_RADIUS: u64 = 3;

/// Random instance satisfying the excision hypotheses on
/// [`excision_space`]: ends positioned in `A`, middle in `B`, `psi` and
/// `chi` of `Y`-propagation at most 2.
pub fn random_excision_instance<R: Rng>(rng: &mut R, n: usize) -> (SupportSpace, FactorizationInstance) {
    let space = excision_space();
    let place = |rng: &mut R, set: &BTreeSet<usize>| {
        let pts: Vec<usize> = set.iter().copied().collect();
        let mut m = random_module(rng, &space, n, 3, 3);
        for p in &mut m.positions {
            p.y = pts[rng.gen_range(0..pts.len())];
        }
        m
    };
    let (a, b) = (space.a.clone().unwrap(), space.b.clone().unwrap());
    let s = place(rng, &a);
    let t = place(rng, &b);
    let u = place(rng, &a);
    let near = |p: &Position, q: &Position| p.y.abs_diff(q.y) < EXCISION_RADIUS as usize;
    let psi = random_morphism(rng, &s, &t, 0.6, near);
    let chi = random_morphism(rng, &t, &u, 0.6, near);
    let phi = chi.compose(&psi).expect("composable");
    (space, FactorizationInstance { phi, psi, chi })
}

// ----- serialization -----

/// A support space with named modules and morphisms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub space: SupportSpace,
    pub modules: BTreeMap<String, GeometricModule>,
    /// Name -> (source module name, target module name, morphism).
    pub morphisms: BTreeMap<String, (String, String, ControlledMorphism)>,
}

impl Instance {
    pub fn render(&self) -> String {
        let mut out = String::from("# controlled instance\n");
        for (tag, m) in [("x", &self.space.x), ("y", &self.space.y)] {
            let _ = writeln!(out, "space {tag} {}", m.len());
            for row in &m.dist {
                let cells: Vec<String> = row.iter().map(u64::to_string).collect();
                let _ = writeln!(out, "{tag}d {}", cells.join(" "));
            }
        }
        for (tag, s) in [("A", &self.space.a), ("B", &self.space.b)] {
            if let Some(s) = s {
                out.push_str("subset ");
                out.push_str(tag);
                for v in s {
                    let _ = write!(out, " {v}");
                }
                out.push('\n');
            }
        }
        for (name, m) in &self.modules {
            let _ = writeln!(out, "module {name} {}", m.len());
            for (i, (p, r)) in m.positions.iter().zip(&m.ranks).enumerate() {
                let _ = writeln!(out, "obj {i} {} {} {} {r}", p.x, p.y, p.level);
            }
        }
        for (name, (s, t, f)) in &self.morphisms {
            let _ = writeln!(out, "morphism {name} {s} {t} {}", f.blocks.len());
            for (&(a, b), m) in &f.blocks {
                let cells: Vec<String> = m.data.iter().map(i64::to_string).collect();
                let _ = writeln!(out, "block {a} {b} {} {} {}", m.rows, m.cols, cells.join(" "));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, AlgebraError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .peekable();
        let err = |line: usize, message: &str| AlgebraError::Parse { line, message: message.to_string() };
        let num = |line: usize, s: &str| s.parse::<u64>().map_err(|_| err(line, &format!("bad number {s:?}")));
        let mut spaces: BTreeMap<String, MetricSpace> = BTreeMap::new();
        let mut subsets: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        let mut modules = BTreeMap::new();
        let mut morphisms = BTreeMap::new();
        while let Some((ln, line)) = lines.next() {
            let w: Vec<&str> = line.split_whitespace().collect();
            match w[0] {
                "space" if w.len() == 3 => {
                    let n = num(ln, w[2])? as usize;
                    let prefix = format!("{}d", w[1]);
                    let mut rows = Vec::with_capacity(n);
                    for _ in 0..n {
                        let (l2, row) = lines.next().ok_or_else(|| err(ln, "missing distance row"))?;
                        let cells: Vec<&str> = row.split_whitespace().collect();
                        if cells.first() != Some(&prefix.as_str()) {
                            return Err(err(l2, &format!("expected a {prefix} row")));
                        }
                        rows.push(cells[1..].iter().map(|c| num(l2, c)).collect::<Result<Vec<_>, _>>()?);
                    }
                    let m = MetricSpace::new(rows).map_err(|e| err(ln, &e.to_string()))?;
                    spaces.insert(w[1].to_string(), m);
                }
                "subset" if w.len() >= 2 => {
                    let s = w[2..].iter().map(|c| num(ln, c).map(|v| v as usize)).collect::<Result<_, _>>()?;
                    subsets.insert(w[1].to_string(), s);
                }
                "module" if w.len() == 3 => {
                    let n = num(ln, w[2])? as usize;
                    let mut m = GeometricModule::default();
                    for i in 0..n {
                        let (l2, row) = lines.next().ok_or_else(|| err(ln, "missing obj line"))?;
                        let c: Vec<&str> = row.split_whitespace().collect();
                        if c.len() != 6 || c[0] != "obj" || num(l2, c[1])? as usize != i {
                            return Err(err(l2, &format!("expected obj {i} x y level rank")));
                        }
                        m.positions.push(Position {
                            x: num(l2, c[2])? as usize,
                            y: num(l2, c[3])? as usize,
                            level: num(l2, c[4])? as u32,
                        });
                        m.ranks.push(num(l2, c[5])? as usize);
                    }
                    modules.insert(w[1].to_string(), m);
                }
                "morphism" if w.len() == 5 => {
                    let lookup = |name: &str| {
                        modules.get(name).cloned().ok_or_else(|| err(ln, &format!("unknown module {name}")))
                    };
                    let mut f = ControlledMorphism::zero(lookup(w[2])?, lookup(w[3])?);
                    for _ in 0..num(ln, w[4])? {
                        let (l2, row) = lines.next().ok_or_else(|| err(ln, "missing block line"))?;
                        let c: Vec<&str> = row.split_whitespace().collect();
                        if c.len() < 5 || c[0] != "block" {
                            return Err(err(l2, "expected block s t rows cols entries"));
                        }
                        let (r, k) = (num(l2, c[3])? as usize, num(l2, c[4])? as usize);
                        let data = c[5..]
                            .iter()
                            .map(|e| e.parse::<i64>().map_err(|_| err(l2, &format!("bad entry {e:?}"))))
                            .collect::<Result<Vec<_>, _>>()?;
                        let m = Matrix::from_rows(r, k, data).map_err(|e| err(l2, &e.to_string()))?;
                        f.set_block(num(l2, c[1])? as usize, num(l2, c[2])? as usize, m)
                            .map_err(|e| err(l2, &e.to_string()))?;
                    }
                    morphisms.insert(w[1].to_string(), (w[2].to_string(), w[3].to_string(), f));
                }
                _ => return Err(err(ln, &format!("unrecognized line {line:?}"))),
            }
        }
        let x = spaces.remove("x").ok_or_else(|| err(0, "missing space x"))?;
        let y = spaces.remove("y").ok_or_else(|| err(0, "missing space y"))?;
        let space = SupportSpace { x, y, a: subsets.remove("A"), b: subsets.remove("B") };
        for (name, m) in &modules {
            m.check_in(&space).map_err(|e| err(0, &format!("module {name}: {e}")))?;
        }
        Ok(Instance { space, modules, morphisms })
    }
}
