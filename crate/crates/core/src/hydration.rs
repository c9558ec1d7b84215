//! Hydration-site placement: density grid ingestion, Gaussian candidate-site
//! proposal, QUBO construction from the L2 objective, classical and emulated
//! quantum solvers, and recovery scoring against reference water positions.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::qubo::{qubo_to_ising, QuboProblem};
use crate::rng::derive_rng;
use crate::sv::{sample, trotter_evolve_dense, DenseState};

const BOHR_TO_ANGSTROM: f64 = 0.529_177_210_903;

/// A sampled scalar density on a (possibly skewed) regular grid, axes in
/// angstrom. Values are clamped to be non-negative on load; `clamped` counts
/// how many voxels needed it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DensityGrid {
    pub origin: [f64; 3],
    pub axes: [[f64; 3]; 3],
    pub shape: (usize, usize, usize),
    /// Row-major with the z index fastest (cube-file order).
    pub values: Vec<f64>,
    pub clamped: usize,
    pub non_orthogonal: bool,
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl DensityGrid {
    pub fn new(
        origin: [f64; 3],
        axes: [[f64; 3]; 3],
        shape: (usize, usize, usize),
        values: Vec<f64>,
    ) -> Result<Self> {
        let n = shape.0 * shape.1 * shape.2;
        if values.len() != n {
            return Err(Error::Invalid(format!(
                "grid needs {n} values, got {}",
                values.len()
            )));
        }
        if det3(&axes).abs() < 1e-12 {
            return Err(Error::Invalid("grid axes are linearly dependent".into()));
        }
        let mut clamped = 0;
        let values = values
            .into_iter()
            .map(|v| {
                if v < 0.0 {
                    clamped += 1;
                    0.0
                } else {
                    v
                }
            })
            .collect();
        let ortho = dot3(axes[0], axes[1]).abs() < 1e-10
            && dot3(axes[0], axes[2]).abs() < 1e-10
            && dot3(axes[1], axes[2]).abs() < 1e-10;
        Ok(DensityGrid {
            origin,
            axes,
            shape,
            values,
            clamped,
            non_orthogonal: !ortho,
        })
    }

    fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.shape.1 + iy) * self.shape.2 + iz
    }

    pub fn value(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.values[self.index(ix, iy, iz)]
    }

    /// Cartesian position (angstrom) of a voxel center.
    pub fn position(&self, ix: usize, iy: usize, iz: usize) -> [f64; 3] {
        let mut p = self.origin;
        for (k, item) in p.iter_mut().enumerate() {
            *item += ix as f64 * self.axes[0][k]
                + iy as f64 * self.axes[1][k]
                + iz as f64 * self.axes[2][k];
        }
        p
    }

    pub fn voxel_volume(&self) -> f64 {
        det3(&self.axes).abs()
    }

    /// Quadrature integral of the density (voxel-sum rule).
    pub fn integrate(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.voxel_volume()
    }

    /// Quadrature inner product of two functions sampled on this grid.
    fn inner_samples(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.voxel_volume()
    }

    /// Samples of a unit-mass isotropic Gaussian centered at `p`.
    fn gaussian_samples(&self, p: [f64; 3], sigma: f64) -> Vec<f64> {
        let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-1.5);
        let mut out = Vec::with_capacity(self.values.len());
        for ix in 0..self.shape.0 {
            for iy in 0..self.shape.1 {
                for iz in 0..self.shape.2 {
                    let r = self.position(ix, iy, iz);
                    let d2 = (r[0] - p[0]).powi(2)
                        + (r[1] - p[1]).powi(2)
                        + (r[2] - p[2]).powi(2);
                    out.push(norm * (-d2 / (2.0 * sigma * sigma)).exp());
                }
            }
        }
        out
    }

    /// Minimum edge length of a voxel.
    fn min_spacing(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| dot3(*a, *a).sqrt())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Parse a Gaussian cube file. Positive voxel counts mean Bohr units
/// (converted to angstrom); negative counts mean the file is already in
/// angstrom.
pub fn load_density(path: &str) -> Result<DensityGrid> {
    parse_cube(&std::fs::read_to_string(path)?)
}

pub fn parse_cube(text: &str) -> Result<DensityGrid> {
    let mut lines = text.lines();
    let _title = lines.next().ok_or_else(|| Error::Parse("empty cube file".into()))?;
    let _comment = lines.next().ok_or_else(|| Error::Parse("truncated cube header".into()))?;
    let mut read_vec = |what: &str| -> Result<(i64, [f64; 3])> {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what} line")))?;
        let mut it = line.split_whitespace();
        let count: i64 = it
            .next()
            .ok_or_else(|| Error::Parse(format!("empty {what} line")))?
            .parse()
            .map_err(|_| Error::Parse(format!("bad count on {what} line")))?;
        let mut v = [0.0; 3];
        for item in &mut v {
            *item = it
                .next()
                .ok_or_else(|| Error::Parse(format!("short {what} line")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad number on {what} line")))?;
        }
        Ok((count, v))
    };
    let (natoms, origin_raw) = read_vec("origin")?;
    let (nx, ax) = read_vec("x-axis")?;
    let (ny, ay) = read_vec("y-axis")?;
    let (nz, az) = read_vec("z-axis")?;
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::Parse("zero-sized cube axis".into()));
    }
    // Cube convention: positive counts mean Bohr, negative mean angstrom.
    let to_ang = |count: i64, v: [f64; 3]| -> [f64; 3] {
        if count > 0 {
            [v[0] * BOHR_TO_ANGSTROM, v[1] * BOHR_TO_ANGSTROM, v[2] * BOHR_TO_ANGSTROM]
        } else {
            v
        }
    };
    let origin = to_ang(nx, origin_raw);
    let axes = [to_ang(nx, ax), to_ang(ny, ay), to_ang(nz, az)];
    for _ in 0..natoms.unsigned_abs() {
        lines
            .next()
            .ok_or_else(|| Error::Parse("truncated atom block".into()))?;
    }
    let shape = (
        nx.unsigned_abs() as usize,
        ny.unsigned_abs() as usize,
        nz.unsigned_abs() as usize,
    );
    let want = shape.0 * shape.1 * shape.2;
    let mut values = Vec::with_capacity(want);
    for line in lines {
        for tok in line.split_whitespace() {
            values.push(
                tok.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad density value '{tok}'")))?,
            );
        }
    }
    if values.len() != want {
        return Err(Error::Parse(format!(
            "cube data has {} values, header promises {want}",
            values.len()
        )));
    }
    DensityGrid::new(origin, axes, shape, values)
}

/// Write a cube file in angstrom (negative voxel counts), full precision so
/// load(save(g)) is bit-exact.
pub fn save_density(g: &DensityGrid, path: &str) -> Result<()> {
    std::fs::write(path, serialize_cube(g)).map_err(Error::from)
}

pub fn serialize_cube(g: &DensityGrid) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    out.push_str("density grid\nangstrom units, z fastest\n");
    let _ = writeln!(
        out,
        "{:5} {:.17e} {:.17e} {:.17e}",
        0, g.origin[0], g.origin[1], g.origin[2]
    );
    for (n, a) in [
        (g.shape.0, g.axes[0]),
        (g.shape.1, g.axes[1]),
        (g.shape.2, g.axes[2]),
    ] {
        let _ = writeln!(out, "{:5} {:.17e} {:.17e} {:.17e}", -(n as i64), a[0], a[1], a[2]);
    }
    for chunk in g.values.chunks(6) {
        let line: Vec<String> = chunk.iter().map(|v| format!("{v:.17e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

/// Candidate water sites with a shared Gaussian width.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateSites {
    pub positions: Vec<[f64; 3]>,
    pub sigma: f64,
    pub exclusion_radius: f64,
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Local density maxima above `threshold`, greedily thinned to pairwise
/// separation >= `min_sep`, ordered by descending density.
pub fn propose_sites(
    g: &DensityGrid,
    threshold: f64,
    min_sep: f64,
    sigma: f64,
) -> CandidateSites {
    let (nx, ny, nz) = g.shape;
    let mut peaks: Vec<(f64, [f64; 3])> = Vec::new();
    for ix in 0..nx {
        for iy in 0..ny {
            for iz in 0..nz {
                let v = g.value(ix, iy, iz);
                if v <= threshold {
                    continue;
                }
                let mut is_peak = true;
                'scan: for dx in -1i64..=1 {
                    for dy in -1i64..=1 {
                        for dz in -1i64..=1 {
                            if dx == 0 && dy == 0 && dz == 0 {
                                continue;
                            }
                            let (jx, jy, jz) =
                                (ix as i64 + dx, iy as i64 + dy, iz as i64 + dz);
                            if jx < 0
                                || jy < 0
                                || jz < 0
                                || jx >= nx as i64
                                || jy >= ny as i64
                                || jz >= nz as i64
                            {
                                continue;
                            }
                            if g.value(jx as usize, jy as usize, jz as usize) > v {
                                is_peak = false;
                                break 'scan;
                            }
                        }
                    }
                }
                if is_peak {
                    peaks.push((v, g.position(ix, iy, iz)));
                }
            }
        }
    }
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut positions: Vec<[f64; 3]> = Vec::new();
    for (_, p) in peaks {
        if positions.iter().all(|q| dist(*q, p) >= min_sep) {
            positions.push(p);
        }
    }
    CandidateSites { positions, sigma, exclusion_radius: min_sep }
}

/// Expand `|| rho - sum_i x_i g_i ||^2` over binary x:
/// `Q_ii = <g_i,g_i> - 2<rho,g_i>` and `Q_ij = <g_i,g_j>` for i != j, all
/// inner products by grid quadrature. Pairs closer than the exclusion radius
/// get `blockade_penalty` added to both symmetric off-diagonal entries.
pub fn build_qubo(
    g: &DensityGrid,
    sites: &CandidateSites,
    blockade_penalty: f64,
) -> Result<QuboProblem> {
    let n = sites.positions.len();
    if n == 0 {
        return Err(Error::Invalid("need at least one candidate site".into()));
    }
    if sites.sigma < g.min_spacing() {
        eprintln!(
            "warning: site width {} angstrom is below the grid spacing {} angstrom",
            sites.sigma,
            g.min_spacing()
        );
    }
    let samples: Vec<Vec<f64>> = sites
        .positions
        .iter()
        .map(|&p| g.gaussian_samples(p, sites.sigma))
        .collect();
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        q[i][i] = g.inner_samples(&samples[i], &samples[i])
            - 2.0 * g.inner_samples(&g.values, &samples[i]);
        for j in (i + 1)..n {
            let mut v = g.inner_samples(&samples[i], &samples[j]);
            if dist(sites.positions[i], sites.positions[j]) < sites.exclusion_radius {
                v += blockade_penalty;
            }
            q[i][j] = v;
            q[j][i] = v;
        }
    }
    let mut problem = QuboProblem::new(q)?;
    problem.site_positions = sites.positions.clone();
    Ok(problem)
}

/// One solved placement.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlacementSolution {
    pub x: u64,
    pub cost: f64,
    pub solver: String,
    pub wall_time_s: f64,
    /// Probability of measuring the true optimum (adiabatic solver only).
    pub ground_probability: Option<f64>,
}

const EXACT_CAP: usize = 25;

/// Exhaustive minimum over all 2^N assignments, walking a Gray code so each
/// step updates the cost with one row sum.
pub fn solve_exact(q: &QuboProblem) -> Result<PlacementSolution> {
    if q.n > EXACT_CAP {
        return Err(Error::SizeLimit(q.n, EXACT_CAP));
    }
    let t0 = std::time::Instant::now();
    let n = q.n;
    let mut x = 0u64;
    let mut cost = 0.0f64;
    let mut best = (0u64, 0.0f64);
    for k in 1u64..(1 << n) {
        let bit = k.trailing_zeros() as usize;
        // Flip `bit`; the cost delta is the diagonal plus twice the coupling
        // to every other currently-set variable (sign by flip direction).
        let mut delta = q.q[bit][bit];
        for j in 0..n {
            if j != bit && x >> j & 1 == 1 {
                delta += 2.0 * q.q[bit][j];
            }
        }
        if x >> bit & 1 == 1 {
            cost -= delta;
        } else {
            cost += delta;
        }
        x ^= 1 << bit;
        if cost < best.1 {
            best = (x, cost);
        }
    }
    Ok(PlacementSolution {
        x: best.0,
        cost: q.cost(best.0),
        solver: "exact".into(),
        wall_time_s: t0.elapsed().as_secs_f64(),
        ground_probability: None,
    })
}

/// Simulated-annealing schedule.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SaSchedule {
    pub t_start: f64,
    pub t_end: f64,
    pub sweeps: usize,
    pub restarts: usize,
}

impl Default for SaSchedule {
    fn default() -> Self {
        SaSchedule { t_start: 5.0, t_end: 0.01, sweeps: 200, restarts: 8 }
    }
}

/// Single-flip Metropolis annealing; deterministic per seed. Restarts run
/// independently and the best-seen assignment wins.
pub fn solve_sa(q: &QuboProblem, schedule: &SaSchedule, seed: u64) -> PlacementSolution {
    use rayon::prelude::*;
    let t0 = std::time::Instant::now();
    let n = q.n;
    let best = (0..schedule.restarts.max(1))
        .into_par_iter()
        .map(|restart| {
            let mut rng = derive_rng(seed, restart as u64);
            let mask = if n >= 64 { u64::MAX } else { (1u64 << n) - 1 };
            let mut x: u64 = rng.gen::<u64>() & mask;
            let mut cost = q.cost(x);
            let mut best = (x, cost);
            for sweep in 0..schedule.sweeps {
                let frac = sweep as f64 / schedule.sweeps.max(1) as f64;
                let temp = schedule.t_start * (schedule.t_end / schedule.t_start).powf(frac);
                for _ in 0..n {
                    let bit = rng.gen_range(0..n);
                    let mut delta = q.q[bit][bit];
                    for j in 0..n {
                        if j != bit && x >> j & 1 == 1 {
                            delta += 2.0 * q.q[bit][j];
                        }
                    }
                    if x >> bit & 1 == 1 {
                        delta = -delta;
                    }
                    if delta <= 0.0 || rng.gen::<f64>() < (-delta / temp).exp() {
                        x ^= 1 << bit;
                        cost += delta;
                        if cost < best.1 {
                            best = (x, cost);
                        }
                    }
                }
            }
            best
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, 0.0));
    PlacementSolution {
        x: best.0,
        cost: q.cost(best.0),
        solver: "sa".into(),
        wall_time_s: t0.elapsed().as_secs_f64(),
        ground_probability: None,
    }
}

const ADIABATIC_CAP: usize = 16;

/// Trotterized adiabatic sweep `H(s) = -(1-s) sum_i X_i + s H_Ising` from the
/// transverse-field ground state `|+...+>`. The returned assignment is the
/// most frequent of 4096 sampled bitstrings; the exact optimum's measurement
/// probability is recorded alongside.
pub fn solve_adiabatic(
    q: &QuboProblem,
    total_time: f64,
    steps: usize,
    seed: u64,
) -> Result<PlacementSolution> {
    if q.n > ADIABATIC_CAP {
        return Err(Error::SizeLimit(q.n, ADIABATIC_CAP));
    }
    let t0 = std::time::Instant::now();
    let n = q.n;
    let ising = qubo_to_ising(q).to_pauli_sum();
    let mut driver_terms = Vec::with_capacity(n);
    for qubit in 0..n {
        driver_terms.push((
            Complex64::new(-1.0, 0.0),
            PauliString::single(n, qubit, 'X')?,
        ));
    }
    let driver = PauliSum::from_terms(n, driver_terms)?;

    let mut state = DenseState::zero_state(n);
    for qubit in 0..n {
        state.apply_gate(&crate::sv::GateOp::h(qubit))?;
    }
    if total_time > 0.0 && steps > 0 {
        let schedule = |t: f64| -> PauliSum {
            let s = (t / total_time).clamp(0.0, 1.0);
            driver
                .scale(Complex64::new(1.0 - s, 0.0))
                .add(&ising.scale(Complex64::new(s, 0.0)))
                .expect("widths match")
        };
        trotter_evolve_dense(&mut state, &schedule, total_time, steps)?;
    }

    let probs = state.probabilities();
    let hist = sample(&probs, 4096, seed, 0)?;
    let x = hist
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(&b, _)| b)
        .unwrap_or(0);
    let exact = solve_exact(q)?;
    let ground_probability = probs
        .iter()
        .find(|&&(b, _)| b == exact.x)
        .map(|&(_, p)| p)
        .unwrap_or(0.0);
    Ok(PlacementSolution {
        x,
        cost: q.cost(x),
        solver: "adiabatic".into(),
        wall_time_s: t0.elapsed().as_secs_f64(),
        ground_probability: Some(ground_probability),
    })
}

/// Percentage of reference (crystal) waters matched one-to-one by selected
/// sites within `match_radius` angstrom, greedy nearest-pair-first.
pub fn score_recovery(
    sol: &PlacementSolution,
    sites: &[[f64; 3]],
    crystal: &[[f64; 3]],
    match_radius: f64,
) -> f64 {
    if crystal.is_empty() {
        return 100.0;
    }
    let selected: Vec<[f64; 3]> = sites
        .iter()
        .enumerate()
        .filter(|(i, _)| sol.x >> i & 1 == 1)
        .map(|(_, p)| *p)
        .collect();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, s) in selected.iter().enumerate() {
        for (j, c) in crystal.iter().enumerate() {
            let d = dist(*s, *c);
            if d <= match_radius {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut used_site = vec![false; selected.len()];
    let mut used_crystal = vec![false; crystal.len()];
    let mut matched = 0usize;
    for (_, i, j) in pairs {
        if !used_site[i] && !used_crystal[j] {
            used_site[i] = true;
            used_crystal[j] = true;
            matched += 1;
        }
    }
    100.0 * matched as f64 / crystal.len() as f64
}

/// Synthetic binding pocket: `n_waters` planted positions with pairwise
/// separation >= `min_sep` inside a cube of the given edge, density = sum of
/// unit Gaussians at those positions plus uniform noise.
pub fn planted_pocket(
    n_waters: usize,
    edge: f64,
    spacing: f64,
    sigma: f64,
    min_sep: f64,
    noise: f64,
    seed: u64,
) -> (DensityGrid, Vec<[f64; 3]>) {
    let mut rng = derive_rng(seed, 0xb10c);
    let mut waters: Vec<[f64; 3]> = Vec::new();
    let mut guard = 0;
    while waters.len() < n_waters && guard < 100_000 {
        guard += 1;
        let p = [
            rng.gen_range(0.15 * edge..0.85 * edge),
            rng.gen_range(0.15 * edge..0.85 * edge),
            rng.gen_range(0.15 * edge..0.85 * edge),
        ];
        if waters.iter().all(|q| dist(*q, p) >= min_sep) {
            waters.push(p);
        }
    }
    let n = (edge / spacing).round() as usize + 1;
    let axes = [[spacing, 0.0, 0.0], [0.0, spacing, 0.0], [0.0, 0.0, spacing]];
    let mut values = vec![0.0f64; n * n * n];
    let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-1.5);
    let mut idx = 0;
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let r = [ix as f64 * spacing, iy as f64 * spacing, iz as f64 * spacing];
                let mut v = 0.0;
                for w in &waters {
                    let d2 = (r[0] - w[0]).powi(2)
                        + (r[1] - w[1]).powi(2)
                        + (r[2] - w[2]).powi(2);
                    v += norm * (-d2 / (2.0 * sigma * sigma)).exp();
                }
                v += noise * rng.gen::<f64>();
                values[idx] = v;
                idx += 1;
            }
        }
    }
    let grid = DensityGrid::new([0.0; 3], axes, (n, n, n), values)
        .expect("planted grid is well-formed");
    (grid, waters)
}
