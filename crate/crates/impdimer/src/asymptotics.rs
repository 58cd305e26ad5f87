//! Spectral formulas for the Dirichlet Green function of the rectangle, its
//! continuum limit, growth of the expected terminal-component size, the decay law
//! of the one-impurity distribution on the chain and the concentration of the
//! impurity at the terminal.
//!
//! All floating-point work is in `f64`. Mode sums are combined by pairwise summation,
//! so results are deterministic for fixed inputs.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::counts::impurity_distribution;
use crate::error::{Error, Result};
use crate::lattice::{Direction, GridSpec, Shape, Site, TerminalSite};
use crate::linalg::RationalScalar;

/// Pairwise sum of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1..=8 => xs.iter().sum(),
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// Dirichlet eigen-decomposition of the `n × m` grid: eigenvalues
/// `4 − 2cos(kπ/(n+1)) − 2cos(lπ/(m+1))` and sine eigenvector factors.
#[derive(Clone, Debug)]
pub struct SpectralGrid {
    n: usize,
    m: usize,
    sin_x: Vec<Vec<f64>>,
    sin_y: Vec<Vec<f64>>,
    eig: Vec<Vec<f64>>,
}

fn sine_table(n: usize) -> Vec<Vec<f64>> {
    (1..=n)
        .map(|k| {
            (0..=n)
                .map(|x| (k as f64 * PI * x as f64 / (n + 1) as f64).sin())
                .collect()
        })
        .collect()
}

impl SpectralGrid {
    /// Precomputes modes for an `n × m` grid.
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::OutOfRange(format!("grid {n}x{m} must be non-empty")));
        }
        let half = |k: usize, n: usize| (k as f64 * PI / (2 * (n + 1)) as f64).sin().powi(2);
        let eig = (1..=n)
            .map(|k| {
                (1..=m)
                    .map(|l| 4.0 * half(k, n) + 4.0 * half(l, m))
                    .collect()
            })
            .collect();
        Ok(SpectralGrid {
            n,
            m,
            sin_x: sine_table(n),
            sin_y: sine_table(m),
            eig,
        })
    }

    /// Grid dimensions.
    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    /// Eigenvalue of mode `(k, l)`, both 1-based.
    pub fn eigenvalue(&self, k: usize, l: usize) -> f64 {
        self.eig[k - 1][l - 1]
    }

    fn check(&self, p: Site) -> Result<()> {
        if p.x == 0 || p.x > self.n || p.y == 0 || p.y > self.m {
            return Err(Error::OutOfRange(format!(
                "site {p} outside {}x{}",
                self.n, self.m
            )));
        }
        Ok(())
    }

    fn norm(&self) -> f64 {
        4.0 / ((self.n + 1) * (self.m + 1)) as f64
    }

    /// Green function `K⁻¹(p, q)` by its eigen-expansion.
    pub fn green(&self, p: Site, q: Site) -> Result<f64> {
        self.check(p)?;
        self.check(q)?;
        let mut terms = Vec::with_capacity(self.n * self.m);
        for k in 0..self.n {
            let fx = self.sin_x[k][p.x] * self.sin_x[k][q.x];
            for l in 0..self.m {
                terms.push(fx * self.sin_y[l][p.y] * self.sin_y[l][q.y] / self.eig[k][l]);
            }
        }
        Ok(self.norm() * pairwise_sum(&terms))
    }

    /// All entries `K⁻¹(·, (1,1))`, indexed `[y-1][x-1]`, by separable mode sums.
    pub fn corner_column(&self) -> Vec<Vec<f64>> {
        let (n, m) = (self.n, self.m);
        let partial: Vec<Vec<f64>> = (0..n)
            .map(|k| {
                (1..=m)
                    .map(|y| {
                        let t: Vec<f64> = (0..m)
                            .map(|l| self.sin_y[l][y] * self.sin_y[l][1] / self.eig[k][l])
                            .collect();
                        pairwise_sum(&t)
                    })
                    .collect()
            })
            .collect();
        (1..=m)
            .map(|y| {
                (1..=n)
                    .map(|x| {
                        let t: Vec<f64> = (0..n)
                            .map(|k| self.sin_x[k][x] * self.sin_x[k][1] * partial[k][y - 1])
                            .collect();
                        self.norm() * pairwise_sum(&t)
                    })
                    .collect()
            })
            .collect()
    }

    /// `Σ_{x,y} K⁻¹((x,y), (1,1))` through the odd-mode closed form, in which only
    /// modes with `k` and `l` odd survive the sum over sites.
    pub fn corner_column_sum(&self) -> f64 {
        let c = |k: usize, n: usize| 1.0 + (k as f64 * PI / (n + 1) as f64).cos();
        let mut terms = Vec::new();
        for k in (1..=self.n).step_by(2) {
            for l in (1..=self.m).step_by(2) {
                terms.push(c(k, self.n) * c(l, self.m) / self.eig[k - 1][l - 1]);
            }
        }
        self.norm() * pairwise_sum(&terms)
    }
}

/// Spectral value of `K⁻¹((x,y), (1,1))` on the `n × m` grid.
pub fn spectral_entry(n: usize, m: usize, x: usize, y: usize) -> Result<f64> {
    SpectralGrid::new(n, m)?.green(Site::new(x, y), Site::new(1, 1))
}

/// Expected terminal-component size `Σ_{x,y} K⁻¹((x,y),(1,1))` on the `n × n` grid
/// with the terminal at the corner, from the odd-mode sum.
pub fn expected_ti_length(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("n = {n} must be at least 2")));
    }
    Ok(SpectralGrid::new(n, n)?.corner_column_sum())
}

/// The same sum taken directly over all sites and modes.
pub fn expected_ti_length_direct(n: usize) -> Result<f64> {
    let g = SpectralGrid::new(n, n)?;
    let all: Vec<f64> = g.corner_column().into_iter().flatten().collect();
    Ok(pairwise_sum(&all))
}

/// Quadrature estimate of the continuum limit entry.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContinuumEstimate {
    /// Estimated value.
    pub value: f64,
    /// Difference from the estimate at half the final resolution.
    pub error: f64,
    /// Cells per axis at the final resolution.
    pub resolution: usize,
}

/// Successive estimates agreeing within this bound stop the refinement.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;

/// Upper bound on cells per axis.
pub const MAX_RESOLUTION: usize = 1 << 14;

fn midpoint(x: usize, y: usize, cells: usize) -> f64 {
    let h = PI / cells as f64;
    let tx: Vec<(f64, f64)> = (0..cells)
        .map(|i| {
            let t = (i as f64 + 0.5) * h;
            ((t * x as f64).sin() * t.sin(), (t / 2.0).sin().powi(2))
        })
        .collect();
    let ty: Vec<(f64, f64)> = if x == y {
        tx.clone()
    } else {
        (0..cells)
            .map(|i| {
                let t = (i as f64 + 0.5) * h;
                ((t * y as f64).sin() * t.sin(), (t / 2.0).sin().powi(2))
            })
            .collect()
    };
    let rows: Vec<f64> = tx
        .iter()
        .map(|&(fx, sx)| {
            let r: Vec<f64> = ty
                .iter()
                .map(|&(fy, sy)| fx * fy / (2.0 * (sx + sy)))
                .collect();
            pairwise_sum(&r)
        })
        .collect();
    2.0 / (PI * PI) * h * h * pairwise_sum(&rows)
}

/// `A(x,y) = (2/π²) ∫∫_{(0,π)²} sin(θx) sin(φy) sinθ sinφ / (2 − cosθ − cosφ)`.
///
/// Tensor midpoint rule starting at `resolution` cells per axis and doubling until
/// successive estimates differ by less than [`QUADRATURE_TOLERANCE`]. The
/// denominator is evaluated as `2 sin²(θ/2) + 2 sin²(φ/2)`, which keeps the bounded
/// integrand accurate near the removable singularity at the origin; the midpoint
/// nodes never touch the origin itself.
pub fn continuum_entry(x: usize, y: usize, resolution: usize) -> Result<ContinuumEstimate> {
    if x == 0 || y == 0 {
        return Err(Error::OutOfRange(format!(
            "({x},{y}) must have positive coordinates"
        )));
    }
    let mut cells = resolution.max(4);
    let mut prev = midpoint(x, y, cells);
    loop {
        let next_cells = cells * 2;
        let next = midpoint(x, y, next_cells);
        let error = (next - prev).abs();
        if error < QUADRATURE_TOLERANCE || next_cells >= MAX_RESOLUTION {
            return Ok(ContinuumEstimate {
                value: next,
                error,
                resolution: next_cells,
            });
        }
        prev = next;
        cells = next_cells;
    }
}

/// `2 + √3`, the growth rate of the chain Green function.
pub fn chain_lambda() -> f64 {
    2.0 + 3f64.sqrt()
}

/// One row of the chain table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainRow {
    /// Distance index, `j = 1` at the terminal vertex.
    pub j: usize,
    /// Exact weight `M(j)`.
    pub weight: String,
    /// Probability of a fixed dual corner, `A(j)/(4ΣA + 2)`.
    pub corner: f64,
    /// Probability of the primal endpoint under the matching measure, `4M(j) / (4ΣM + 2 det K)`.
    pub matching: f64,
    /// `M(j+1)/M(j)`, absent on the last row.
    pub ratio: Option<f64>,
}

/// Exact chain weights with a fitted geometric decay.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainTable {
    /// Chain length.
    pub n: usize,
    /// Rows for `j = 1..=n`.
    pub rows: Vec<ChainRow>,
    /// Fit window `(first, last)` in `j`.
    pub window: (usize, usize),
    /// Least-squares rate `r` in `M(j) ∝ r^j` over the window.
    pub rate: f64,
    /// Mean of `corner(j) · λ₊^j` over the window.
    pub corner_constant: f64,
    /// Mean of `matching(j) · λ₊^j` over the window.
    pub matching_constant: f64,
}

impl ChainTable {
    /// CSV rendering with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,weight,corner,matching,ratio\n");
        for r in &self.rows {
            let ratio = r.ratio.map(|x| x.to_string()).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.j, r.weight, r.corner, r.matching, ratio
            ));
        }
        s
    }

    /// Versioned JSON report.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({"schema": 1, "kind": "chain-asymptotics", "table": self, "lambda": chain_lambda()})
    }
}

fn as_f64(r: &RationalScalar) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Chain of length `n` with the terminal attached at the end vertex.
pub fn chain_spec(n: usize) -> Result<GridSpec> {
    GridSpec::new(
        Shape::Chain { len: n },
        1,
        vec![TerminalSite {
            site: Site::new(1, 1),
            dir: Direction::W,
        }],
    )
}

/// Exact one-impurity weights on the chain with the fitted decay rate.
pub fn chain_asymptotics(n: usize) -> Result<ChainTable> {
    if n < 2 {
        return Err(Error::OutOfRange(format!(
            "chain length {n} must be at least 2"
        )));
    }
    let dist = impurity_distribution(&chain_spec(n)?)?;
    let total = RationalScalar::from_integer(dist.total_matchings.clone());
    let weights: Vec<&BigInt> = dist.rows.iter().map(|r| &r.weight).collect();
    let rows: Vec<ChainRow> = dist
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| ChainRow {
            j: i + 1,
            weight: r.weight.to_string(),
            corner: as_f64(&r.corner),
            matching: as_f64(&(RationalScalar::from_integer(&r.weight * 4) / &total)),
            ratio: weights
                .get(i + 1)
                .map(|next| as_f64(&RationalScalar::new((*next).clone(), r.weight.clone()))),
        })
        .collect();
    let first = 5.min(n);
    let last = 15.min(n.saturating_sub(5)).max(first);
    let window = (first, last);
    let lambda = chain_lambda();
    let pts: Vec<(f64, f64)> = (first..=last)
        .map(|j| (j as f64, weights[j - 1].to_f64().unwrap_or(f64::NAN).ln()))
        .collect();
    let rate = if pts.len() >= 2 {
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxy / sxx).exp()
    } else {
        rows[0].ratio.unwrap_or(f64::NAN)
    };
    let mean = |f: &dyn Fn(&ChainRow) -> f64| {
        (first..=last)
            .map(|j| f(&rows[j - 1]) * lambda.powi(j as i32))
            .sum::<f64>()
            / (last - first + 1) as f64
    };
    let corner_constant = mean(&|r| r.corner);
    let matching_constant = mean(&|r| r.matching);
    Ok(ChainTable {
        n,
        rows,
        window,
        rate,
        corner_constant,
        matching_constant,
    })
}

/// `M(j) = D_{n−j}` where `D_0 = 1`, `D_1 = 4`, `D_i = 4 D_{i−1} − D_{i−2}` are the
/// determinants of trailing tridiagonal blocks.
pub fn chain_weights_recurrence(n: usize) -> Vec<BigInt> {
    let mut d = vec![BigInt::from(1), BigInt::from(4)];
    while d.len() < n + 1 {
        let i = d.len();
        let next = &d[i - 1] * 4 - &d[i - 2];
        d.push(next);
    }
    (1..=n).map(|j| d[n - j].clone()).collect()
}

/// Lattice family for concentration tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Lattice {
    /// The `1 × n` chain with the terminal at vertex 1.
    Chain,
    /// The `n × n` grid with the terminal at the corner `(1,1)`.
    Grid,
}

/// How a tail mass was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TailMethod {
    /// Exact rational weights.
    Exact,
    /// Floating-point spectral sums.
    Spectral,
}

/// Largest grid side for which the 2-D profile uses exact weights.
pub const EXACT_GRID_LIMIT: usize = 32;

/// One row of a concentration table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailRow {
    /// System size.
    pub n: usize,
    /// Box fraction.
    pub c: f64,
    /// Matching-measure probability that `max(x−1, y−1) ≥ c·n`.
    pub tail: f64,
    /// Computation route.
    pub method: TailMethod,
}

/// Row-wise CSV rendering of a concentration table.
pub fn tail_csv(rows: &[TailRow]) -> String {
    let mut s = String::from("n,c,tail,method\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{:?}\n", r.n, r.c, r.tail, r.method));
    }
    s
}

fn far(s: Site, n: usize, c: f64) -> bool {
    ((s.x.max(s.y) - 1) as f64) >= c * n as f64
}

/// Probability, under the uniform measure on perfect matchings, that the impurity's
/// primal endpoint lies outside the sup-norm box of side `c·n` around the terminal.
/// Grids up to [`EXACT_GRID_LIMIT`] and all chains use exact weights.
pub fn tail_mass(lattice: Lattice, n: usize, c: f64) -> Result<TailRow> {
    let method = match lattice {
        Lattice::Grid if n > EXACT_GRID_LIMIT => TailMethod::Spectral,
        _ => TailMethod::Exact,
    };
    tail_mass_with(lattice, n, c, method)
}

/// [`tail_mass`] with an explicit route. The spectral route is available on grids only.
pub fn tail_mass_with(lattice: Lattice, n: usize, c: f64, method: TailMethod) -> Result<TailRow> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::OutOfRange(format!("c = {c} must lie in (0, 1]")));
    }
    if n == 0 {
        return Err(Error::OutOfRange("n must be positive".into()));
    }
    if method == TailMethod::Exact {
        let spec = match lattice {
            Lattice::Chain => chain_spec(n)?,
            Lattice::Grid => GridSpec::rect_one(
                n,
                n,
                TerminalSite {
                    site: Site::new(1, 1),
                    dir: Direction::S,
                },
            )?,
        };
        let dist = impurity_distribution(&spec)?;
        let tail: BigInt = dist
            .rows
            .iter()
            .filter(|r| far(r.site, n, c))
            .map(|r| &r.weight * 4)
            .sum();
        let p = if tail.is_zero() {
            0.0
        } else {
            as_f64(&RationalScalar::new(tail, dist.total_matchings))
        };
        return Ok(TailRow {
            n,
            c,
            tail: p,
            method: TailMethod::Exact,
        });
    }
    if lattice == Lattice::Chain {
        return Err(Error::Unsupported(
            "spectral tails are implemented for grids".into(),
        ));
    }
    let col = SpectralGrid::new(n, n)?.corner_column();
    let mut all = Vec::with_capacity(n * n);
    let mut far_terms = Vec::new();
    for (y, row) in col.iter().enumerate() {
        for (x, &a) in row.iter().enumerate() {
            all.push(a);
            if far(Site::new(x + 1, y + 1), n, c) {
                far_terms.push(a);
            }
        }
    }
    let tail = 4.0 * pairwise_sum(&far_terms) / (4.0 * pairwise_sum(&all) + 2.0);
    Ok(TailRow {
        n,
        c,
        tail,
        method: TailMethod::Spectral,
    })
}

/// Tail masses for each size in `ns`.
pub fn concentration_profile(lattice: Lattice, ns: &[usize], c: f64) -> Result<Vec<TailRow>> {
    ns.iter().map(|&n| tail_mass(lattice, n, c)).collect()
}

/// Per-unit decay rates `−ln(tail_{i+1}/tail_i)/(n_{i+1} − n_i)` between consecutive rows.
pub fn decay_rates(rows: &[TailRow]) -> Vec<f64> {
    rows.windows(2)
        .map(|w| -(w[1].tail / w[0].tail).ln() / (w[1].n as f64 - w[0].n as f64))
        .collect()
}
