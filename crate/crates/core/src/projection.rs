//! The levelset-averaging projection `P`, i.e. the conditional expectation
//! of `ρ` given `p`.
//!
//! The data `D(λ)` is blind to anything `ρ` does inside a levelset of `p`:
//! two sources produce the same data exactly when their projections agree.
//! A [`LevelsetPartition`] is a finite approximation of the sets `σ(p)` can
//! tell apart. Pieces of the interval on which `p` is flat are grouped by
//! their value (separated plateaus with the same value form one cell); the
//! remaining pieces are singletons on which `p` is treated as strictly
//! monotone.
//!
//! On plateau cells `Pρ` is the cell average. On monotone pieces it is the
//! pointwise conditional expectation
//! `E[ρ | p = v] = Σ_i ρ(x_i)/|p'(x_i)| / Σ_i 1/|p'(x_i)|` over all monotone
//! points `x_i` with `p(x_i) = v`, which reduces to `ρ` itself where `p` is
//! injective.

use crate::{
    attenuation::{AttenuationExponent, Representation},
    basis::Interval,
    error::{Error, Result},
    measurement::forward_data,
    parallel::Execution,
    profile::Density,
    quadrature::{merge_breakpoints, simpson_piecewise},
};
use std::io::Write;

/// Panel pairs per piece used when averaging over plateau cells.
const AVERAGE_PANELS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellKind {
    Plateau,
    /// `p` runs linearly from `p_left` to `p_right` across the single piece.
    Monotone { p_left: f64, p_right: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelCell {
    /// Disjoint subintervals `(l, r]`, sorted.
    pub pieces: Vec<(f64, f64)>,
    /// Representative value of `p` on the cell.
    pub p_value: f64,
    pub kind: CellKind,
}

impl LevelCell {
    pub fn measure(&self) -> f64 {
        self.pieces.iter().map(|(l, r)| r - l).sum()
    }

    pub fn is_plateau(&self) -> bool {
        self.kind == CellKind::Plateau
    }

    pub fn contains(&self, x: f64) -> bool {
        self.pieces.iter().any(|&(l, r)| x > l && x <= r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelsetPartition {
    interval: Interval,
    eps_p: f64,
    cells: Vec<LevelCell>,
    /// Elementary pieces `[edges[i], edges[i + 1]]` and their owning cell.
    edges: Vec<f64>,
    owner: Vec<usize>,
    members: Vec<Vec<usize>>,
    /// Monotone cells sorted by the lower end of their `p` range.
    monotone_by_min: Vec<(f64, usize)>,
    widest_range: f64,
}

/// Default flatness tolerance: `1e-12` for closed forms, `1e-9 · range(p)`
/// for sampled exponents.
pub fn default_eps(p: &AttenuationExponent) -> f64 {
    match p.representation() {
        Representation::ClosedFormSegments { .. } => 1e-12,
        Representation::DenseSamples { .. } => (1e-9 * p.range()).max(f64::MIN_POSITIVE),
    }
}

fn despike(values: &[f64], eps: f64) -> Vec<f64> {
    let mut out = values.to_vec();
    for i in 1..values.len().saturating_sub(1) {
        let (l, m, r) = (values[i - 1], values[i], values[i + 1]);
        if (l - r).abs() <= eps && (m - l).abs() > eps {
            out[i] = l;
        }
    }
    out
}

struct Piece {
    l: f64,
    r: f64,
    flat: Option<f64>,
    p_left: f64,
    p_right: f64,
}

fn classify_pieces(p: &AttenuationExponent, grid_resolution: usize, eps: f64) -> Vec<Piece> {
    let iv = p.interval();
    match p.representation() {
        Representation::ClosedFormSegments { edges, segments } => {
            let grid = iv.uniform_nodes(grid_resolution);
            let cuts = merge_breakpoints(iv.a(), iv.b(), grid.into_iter().chain(edges.iter().copied()));
            cuts.windows(2)
                .map(|w| {
                    let (l, r) = (w[0], w[1]);
                    let mid = 0.5 * (l + r);
                    let s = edges[1..edges.len() - 1].partition_point(|e| *e < mid);
                    let seg = &segments[s];
                    let (pl, pr) = (seg.eval(l), seg.eval(r));
                    let level = seg.eval(mid);
                    let flat = (seg.is_constant() || ((pl - pr).abs() <= eps && (level - pl).abs() <= eps))
                        .then_some(level);
                    Piece { l, r, flat, p_left: pl, p_right: pr }
                })
                .collect()
        }
        Representation::DenseSamples { values } => {
            let clean = despike(values, eps);
            let sampled = AttenuationExponent::from_samples(iv, clean.clone())
                .expect("despiked samples stay finite");
            let n = clean.len() - 1;
            let sample_step = iv.length() / n as f64;
            let cuts = iv.uniform_nodes(grid_resolution);
            cuts.windows(2)
                .map(|w| {
                    let (l, r) = (w[0], w[1]);
                    let (pl, pr) = (sampled.eval(l), sampled.eval(r));
                    let first = ((l - iv.a()) / sample_step).ceil() as usize;
                    let last = (((r - iv.a()) / sample_step).floor() as usize).min(n);
                    let (mut lo, mut hi) = (pl.min(pr), pl.max(pr));
                    for v in clean.iter().take(last + 1).skip(first) {
                        lo = lo.min(*v);
                        hi = hi.max(*v);
                    }
                    let flat = (hi - lo <= eps).then_some(0.5 * (lo + hi));
                    Piece { l, r, flat, p_left: pl, p_right: pr }
                })
                .collect()
        }
    }
}

/// Splits the interval of `p` into levelset cells.
///
/// `grid_resolution` uniform pieces are laid over the interval (segment
/// edges of closed-form exponents are added as extra cuts). Flat pieces whose
/// values agree within `eps_p` are merged into one cell, even when they are
/// not adjacent.
pub fn partition_levelsets(p: &AttenuationExponent, grid_resolution: usize, eps_p: f64) -> Result<LevelsetPartition> {
    if grid_resolution == 0 {
        return Err(Error::arg("grid_resolution must be positive"));
    }
    if !(eps_p > 0.0 && eps_p.is_finite()) {
        return Err(Error::arg(format!("eps_p must be positive, got {eps_p}")));
    }
    let pieces = classify_pieces(p, grid_resolution, eps_p);

    // cluster flat pieces by value
    let mut flat: Vec<usize> = (0..pieces.len()).filter(|&i| pieces[i].flat.is_some()).collect();
    flat.sort_by(|&i, &j| {
        pieces[i].flat.unwrap().total_cmp(&pieces[j].flat.unwrap()).then(i.cmp(&j))
    });
    let mut owner = vec![usize::MAX; pieces.len()];
    let mut cells: Vec<LevelCell> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut last_value = f64::NEG_INFINITY;
    for &i in &flat {
        let v = pieces[i].flat.unwrap();
        if members.is_empty() || v - last_value > eps_p {
            members.push(Vec::new());
        }
        members.last_mut().unwrap().push(i);
        last_value = v;
    }
    for mut group in members {
        group.sort_unstable();
        let id = cells.len();
        let mut sub: Vec<(f64, f64)> = Vec::new();
        for &i in &group {
            owner[i] = id;
            let pc = &pieces[i];
            match sub.last_mut() {
                Some(last) if last.1 == pc.l => last.1 = pc.r,
                _ => sub.push((pc.l, pc.r)),
            }
        }
        cells.push(LevelCell {
            pieces: sub,
            p_value: pieces[group[0]].flat.unwrap(),
            kind: CellKind::Plateau,
        });
    }
    let mut monotone_by_min = Vec::new();
    let mut widest_range = 0.0f64;
    for (i, pc) in pieces.iter().enumerate() {
        if pc.flat.is_some() {
            continue;
        }
        let id = cells.len();
        owner[i] = id;
        monotone_by_min.push((pc.p_left.min(pc.p_right), id));
        widest_range = widest_range.max((pc.p_right - pc.p_left).abs());
        cells.push(LevelCell {
            pieces: vec![(pc.l, pc.r)],
            p_value: 0.5 * (pc.p_left + pc.p_right),
            kind: CellKind::Monotone {
                p_left: pc.p_left,
                p_right: pc.p_right,
            },
        });
    }
    monotone_by_min.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut members = vec![Vec::new(); cells.len()];
    for (i, &c) in owner.iter().enumerate() {
        members[c].push(i);
    }
    let mut edges: Vec<f64> = pieces.iter().map(|pc| pc.l).collect();
    edges.push(pieces[pieces.len() - 1].r);
    Ok(LevelsetPartition {
        interval: p.interval(),
        eps_p,
        cells,
        edges,
        owner,
        members,
        monotone_by_min,
        widest_range,
    })
}

impl LevelsetPartition {
    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn eps_p(&self) -> f64 {
        self.eps_p
    }

    pub fn cells(&self) -> &[LevelCell] {
        &self.cells
    }

    pub fn plateau_cells(&self) -> impl Iterator<Item = (usize, &LevelCell)> {
        self.cells.iter().enumerate().filter(|(_, c)| c.is_plateau())
    }

    /// Edges of the elementary pieces, `a` to `b`.
    pub fn piece_edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn piece_midpoints(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn piece_lengths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Cell owning elementary piece `i`.
    pub fn piece_owner(&self, i: usize) -> usize {
        self.owner[i]
    }

    /// Cell containing `x` (pieces are left-open except the first).
    pub fn cell_of(&self, x: f64) -> usize {
        let i = self.edges[1..self.edges.len() - 1].partition_point(|e| *e < x);
        self.owner[i]
    }

    /// Discrete projection of a function given by one value per elementary
    /// piece: plateau cells are replaced by their length-weighted mean,
    /// monotone pieces pass through. Self-adjoint for the length-weighted
    /// inner product.
    pub fn average_piece_values(&self, values: &[f64]) -> Result<Vec<f64>> {
        let n = self.owner.len();
        if values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: values.len(),
            });
        }
        let lengths = self.piece_lengths();
        let mut sums = vec![0.0; self.cells.len()];
        let mut weights = vec![0.0; self.cells.len()];
        for i in 0..n {
            sums[self.owner[i]] += lengths[i] * values[i];
            weights[self.owner[i]] += lengths[i];
        }
        Ok((0..n)
            .map(|i| {
                let c = self.owner[i];
                if self.cells[c].is_plateau() {
                    sums[c] / weights[c]
                } else {
                    values[i]
                }
            })
            .collect())
    }

    /// CSV with columns `cell,kind,p_value,subintervals`; subintervals are
    /// written `l:r` and joined with `;`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "cell,kind,p_value,subintervals")?;
        for (i, c) in self.cells.iter().enumerate() {
            let kind = if c.is_plateau() { "plateau" } else { "monotone" };
            let subs: Vec<String> = c.pieces.iter().map(|(l, r)| format!("{l:e}:{r:e}")).collect();
            writeln!(out, "{i},{kind},{:e},{}", c.p_value, subs.join(";"))?;
        }
        Ok(())
    }

    fn coarea(&self, x: f64, cell: usize, rho: &dyn Density) -> f64 {
        let CellKind::Monotone { p_left, p_right } = self.cells[cell].kind else {
            unreachable!("coarea on a plateau cell")
        };
        let (l, r) = self.cells[cell].pieces[0];
        if p_left == p_right {
            return rho.value(x);
        }
        let v = p_left + (x - l) / (r - l) * (p_right - p_left);
        let start = self
            .monotone_by_min
            .partition_point(|(m, _)| *m < v - self.widest_range);
        let mut num = 0.0;
        let mut den = 0.0;
        let mut count = 0;
        // half-open ranges [min, max), with ties at shared nodes broken
        // consistently despite rounding in p
        let tie = 1e-12 * (1.0 + v.abs());
        for &(min, id) in &self.monotone_by_min[start..] {
            if min > v + tie {
                break;
            }
            let CellKind::Monotone { p_left: a, p_right: b } = self.cells[id].kind else {
                continue;
            };
            if v >= a.max(b) - tie {
                continue;
            }
            let (cl, cr) = self.cells[id].pieces[0];
            let xi = if id == cell { x } else { cl + (v - a) / (b - a) * (cr - cl) };
            let w = (cr - cl) / (b - a).abs();
            num += w * rho.value(xi);
            den += w;
            count += 1;
        }
        if count <= 1 {
            // single preimage: p is locally injective
            return rho.value(x);
        }
        num / den
    }
}

/// `Pρ` as a function: cell averages on plateaus, conditional expectation on
/// monotone pieces.
pub struct ProjectedDensity<'a> {
    partition: &'a LevelsetPartition,
    rho: &'a dyn Density,
    cell_averages: Vec<Option<f64>>,
}

impl<'a> ProjectedDensity<'a> {
    pub fn partition(&self) -> &LevelsetPartition {
        self.partition
    }

    /// Average of `ρ` on every plateau cell (`None` on monotone cells).
    pub fn cell_averages(&self) -> &[Option<f64>] {
        &self.cell_averages
    }

    pub fn eval(&self, x: f64) -> f64 {
        let c = self.partition.cell_of(x);
        match self.cell_averages[c] {
            Some(avg) => avg,
            None => self.partition.coarea(x, c, self.rho),
        }
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

impl Density for ProjectedDensity<'_> {
    fn value(&self, x: f64) -> f64 {
        self.eval(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.partition
            .plateau_cells()
            .flat_map(|(_, c)| c.pieces.iter().flat_map(|&(l, r)| [l, r]))
            .chain(self.rho.breakpoints())
            .collect()
    }
}

/// `∫_cell ρ / |cell|` by piecewise Simpson over the cell's elementary
/// pieces, with `ρ`'s breakpoints added.
pub fn cell_average(partition: &LevelsetPartition, cell: usize, rho: &dyn Density) -> Result<f64> {
    let mut kinks = rho.breakpoints();
    kinks.sort_by(f64::total_cmp);
    let edges = partition.piece_edges();
    let mut total = 0.0;
    for &i in &partition.members[cell] {
        let (l, r) = (edges[i], edges[i + 1]);
        let lo = kinks.partition_point(|k| *k <= l);
        let hi = kinks.partition_point(|k| *k < r);
        let pts = merge_breakpoints(l, r, kinks[lo..hi].iter().copied());
        total += simpson_piecewise(|x| rho.value(x), &pts, AVERAGE_PANELS)?;
    }
    let m = partition.cells()[cell].measure();
    if m <= 0.0 {
        return Err(Error::Numeric("levelset cell of zero measure".into()));
    }
    Ok(total / m)
}

pub fn project<'a>(rho: &'a dyn Density, partition: &'a LevelsetPartition) -> Result<ProjectedDensity<'a>> {
    project_with(rho, partition, Execution::default())
}

pub fn project_with<'a>(
    rho: &'a dyn Density,
    partition: &'a LevelsetPartition,
    execution: Execution,
) -> Result<ProjectedDensity<'a>> {
    let cells = partition.cells();
    let averages = execution.map(cells.len(), |i| {
        if cells[i].is_plateau() {
            cell_average(partition, i, rho).map(Some)
        } else {
            Ok(None)
        }
    });
    Ok(ProjectedDensity {
        partition,
        rho,
        cell_averages: averages.into_iter().collect::<Result<_>>()?,
    })
}

/// `max_j |D_ρ(λ_j) − D_{Pρ}(λ_j)|`, zero in exact arithmetic.
pub fn data_invariance_gap(
    p: &AttenuationExponent,
    rho: &dyn Density,
    projected: &ProjectedDensity<'_>,
    lambdas: &[f64],
    n_panels: usize,
) -> Result<f64> {
    if lambdas.is_empty() {
        return Err(Error::arg("no lambdas given"));
    }
    let mut gap = 0.0f64;
    for &l in lambdas {
        let d1 = forward_data(p, rho, l, n_panels)?;
        let d2 = forward_data(p, projected, l, n_panels)?;
        gap = gap.max((d1 - d2).abs());
    }
    Ok(gap)
}

/// `shape` minus its cell average, supported on one plateau cell. Adding it
/// to any source leaves the data unchanged.
pub struct LevelsetPerturbation<S> {
    pieces: Vec<(f64, f64)>,
    mean: f64,
    shape: S,
}

impl<S: Density> Density for LevelsetPerturbation<S> {
    fn value(&self, x: f64) -> f64 {
        if self.pieces.iter().any(|&(l, r)| x > l && x <= r) {
            self.shape.value(x) - self.mean
        } else {
            0.0
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.pieces
            .iter()
            .flat_map(|&(l, r)| [l, r])
            .chain(self.shape.breakpoints())
            .collect()
    }
}

impl<S> LevelsetPerturbation<S> {
    pub fn mean_removed(&self) -> f64 {
        self.mean
    }
}

pub fn levelset_perturbation<S: Density>(
    partition: &LevelsetPartition,
    cell: usize,
    shape: S,
) -> Result<LevelsetPerturbation<S>> {
    let c = partition
        .cells()
        .get(cell)
        .ok_or_else(|| Error::arg(format!("no cell {cell}")))?;
    if !c.is_plateau() {
        return Err(Error::arg(format!("cell {cell} is not a plateau of p")));
    }
    let mean = cell_average(partition, cell, &shape)?;
    Ok(LevelsetPerturbation {
        pieces: c.pieces.clone(),
        mean,
        shape,
    })
}

/// Brute-force discrete conditional expectation: quantize the `p` samples
/// into `n_bins` equal-width value bins and replace each `ρ` sample by the
/// mean of its bin.
pub fn conditional_expectation_oracle(p_samples: &[f64], rho_samples: &[f64], n_bins: usize) -> Result<Vec<f64>> {
    if p_samples.len() != rho_samples.len() {
        return Err(Error::DimensionMismatch {
            expected: p_samples.len(),
            found: rho_samples.len(),
        });
    }
    if n_bins == 0 {
        return Err(Error::arg("n_bins must be positive"));
    }
    let lo = p_samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = p_samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / n_bins as f64;
    let bin = |v: f64| {
        if width > 0.0 {
            (((v - lo) / width) as usize).min(n_bins - 1)
        } else {
            0
        }
    };
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for (&p, &r) in p_samples.iter().zip(rho_samples) {
        let b = bin(p);
        sums[b] += r;
        counts[b] += 1;
    }
    Ok(p_samples.iter().map(|&p| {
        let b = bin(p);
        sums[b] / counts[b] as f64
    }).collect())
}
