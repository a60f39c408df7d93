//! Two-particle dynamics in mixed coordinates: total momentum `p` times a
//! relative position `y`, with a four-component internal block per `y`.
//!
//! The pair step block-diagonalizes over `p`, leaving for each momentum a
//! one-dimensional hopping problem `U_2(chi, p) = W2h(p) J_h(chi)` on `y`
//! whose kernel is a 4x4 block matrix in the internal basis RR, RL, LR,
//! LL. The interaction is the phase `e^(i chi)` on the two middle
//! components at `y = 0`. Truncating `|y| <= Y` with a hard cutoff gives a
//! dense operator whose localized unit-modulus eigenvectors are the
//! two-particle bound states; `bound_state_scan` finds them by a coarse
//! dense diagonalization followed by inverse-iteration refinement on the
//! antisymmetric subspace at full size. Flat bands of the pair dispersion
//! put a macroscopically degenerate eigenvalue on the unit circle; the
//! dense solver hands back an arbitrary, delocalized basis there, so
//! degenerate clusters are handled by minimizing the spatial second
//! moment over the cluster span instead of refining single vectors.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, FactorizeInto, Norm, Solve, UPLO, SVD};
use num_complex::Complex64;

use crate::algebra::WalkParams;
use crate::error::{Error, Result};
use crate::par::{map_indexed, Exec};

/// Dense truncated pair-step matrix at fixed total momentum.
#[derive(Clone, Debug)]
pub struct HybridOperator {
    pub p: f64,
    pub y_radius: u64,
    /// Dimension `4 (2 y_radius + 1)`, basis `(y, w)` with `y` ascending
    /// and `w` in RR, RL, LR, LL order inside each block.
    pub matrix: Array2<Complex64>,
}

impl HybridOperator {
    pub fn dim(&self) -> usize {
        4 * (2 * self.y_radius as usize + 1)
    }
}

fn flat(y: i64, w: usize, y_radius: i64) -> usize {
    4 * (y + y_radius) as usize + w
}

/// The sixteen internal entries as `(coefficient, y-shift)`, scaled by
/// `mn` so no entry divides by a mass parameter. Internal order RR, RL,
/// LR, LL; a shift `s` moves amplitude from `y` to `y + s`.
fn block_entries(p: f64, params: &WalkParams) -> [[(Complex64, i64); 4]; 4] {
    let m = params.m();
    let n = params.n();
    let nn = Complex64::new(n * n, 0.0);
    let mm = Complex64::new(-m * m, 0.0);
    let imn = Complex64::new(0.0, m * n);
    let em = Complex64::from_polar(1.0, -p);
    let ep = Complex64::from_polar(1.0, p);
    [
        [(nn * em * em, 0), (imn * em, 1), (imn * em, -1), (mm, 0)],
        [(imn * em, 1), (nn, 2), (mm, 0), (imn * ep, 1)],
        [(imn * em, -1), (mm, 0), (nn, -2), (imn * ep, -1)],
        [(mm, 0), (imn * ep, 1), (imn * ep, -1), (nn * ep * ep, 0)],
    ]
}

/// Applies `U_2(chi, p)` to a truncated vector: phase the `y = 0` middle
/// components, then the blocked shift kernel. Amplitude shifted past
/// `|y| = Y` is dropped.
fn apply_u2(v: &[Complex64], p: f64, params: &WalkParams, y_radius: i64) -> Vec<Complex64> {
    let dim = 4 * (2 * y_radius + 1) as usize;
    assert_eq!(v.len(), dim);
    let phase = params.interaction_phase();
    let entries = block_entries(p, params);
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    for y in -y_radius..=y_radius {
        for w_in in 0..4 {
            let mut a = v[flat(y, w_in, y_radius)];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            if y == 0 && (w_in == 1 || w_in == 2) {
                a *= phase;
            }
            for (w_out, row) in entries.iter().enumerate() {
                let (coeff, s) = row[w_in];
                let y_out = y + s;
                if y_out.abs() <= y_radius {
                    out[flat(y_out, w_out, y_radius)] += coeff * a;
                }
            }
        }
    }
    out
}

/// Assembles the dense truncated matrix of `U_2(chi, p)`.
pub fn build_hybrid_operator(p: f64, params: &WalkParams, y_radius: u64) -> Result<HybridOperator> {
    if params.m() == 0.0 || params.n() == 0.0 {
        return Err(Error::InvalidParameter(
            "the blocked pair kernel is singular at zero or unit mass".into(),
        ));
    }
    if y_radius < 4 {
        return Err(Error::InvalidParameter(format!(
            "truncation radius must be at least 4, got {y_radius}"
        )));
    }
    let yr = y_radius as i64;
    let dim = 4 * (2 * y_radius as usize + 1);
    let mut matrix = Array2::zeros((dim, dim));
    for j in 0..dim {
        let mut e = vec![Complex64::new(0.0, 0.0); dim];
        e[j] = Complex64::new(1.0, 0.0);
        for (i, a) in apply_u2(&e, p, params, yr).into_iter().enumerate() {
            matrix[(i, j)] = a;
        }
    }
    Ok(HybridOperator {
        p,
        y_radius,
        matrix,
    })
}

/// Exchange in mixed coordinates: `y` reflects and the internal slots
/// swap, `(y, w1 w2) -> (-y, w2 w1)`.
fn exchange_image(idx: usize, y_radius: i64) -> usize {
    let block = idx / 4;
    let w = idx % 4;
    let y = block as i64 - y_radius;
    let w_swapped = match w {
        1 => 2,
        2 => 1,
        other => other,
    };
    flat(-y, w_swapped, y_radius)
}

/// Dimension of the antisymmetric subspace, `4 Y + 1`.
fn antisym_dim(y_radius: u64) -> usize {
    4 * y_radius as usize + 1
}

/// Index map for the antisymmetric basis: slot 0 is the `y = 0`
/// combination `(RL - LR)/sqrt(2)`, then four components per `y >= 1`.
fn antisym_slot(y: i64, w: usize) -> usize {
    debug_assert!(y >= 1 || (y == 0 && w == 1));
    if y == 0 {
        0
    } else {
        1 + 4 * (y as usize - 1) + w
    }
}

fn embed_antisym(a: &[Complex64], y_radius: i64) -> Vec<Complex64> {
    let dim = 4 * (2 * y_radius + 1) as usize;
    let mut full = vec![Complex64::new(0.0, 0.0); dim];
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    full[flat(0, 1, y_radius)] += r * a[0];
    full[flat(0, 2, y_radius)] -= r * a[0];
    for y in 1..=y_radius {
        for w in 0..4 {
            let v = a[antisym_slot(y, w)];
            full[flat(y, w, y_radius)] += r * v;
            let mirror = exchange_image(flat(y, w, y_radius), y_radius);
            full[mirror] -= r * v;
        }
    }
    full
}

fn project_antisym(full: &[Complex64], y_radius: i64) -> Vec<Complex64> {
    let mut a = vec![Complex64::new(0.0, 0.0); antisym_dim(y_radius as u64)];
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    a[0] = r * (full[flat(0, 1, y_radius)] - full[flat(0, 2, y_radius)]);
    for y in 1..=y_radius {
        for w in 0..4 {
            let mirror = exchange_image(flat(y, w, y_radius), y_radius);
            a[antisym_slot(y, w)] = r * (full[flat(y, w, y_radius)] - full[mirror]);
        }
    }
    a
}

/// `U_2(chi, p)` restricted to the antisymmetric subspace, built column
/// by column through embed, apply, project.
fn reduced_operator(p: f64, params: &WalkParams, y_radius: u64) -> Array2<Complex64> {
    let yr = y_radius as i64;
    let dim = antisym_dim(y_radius);
    let mut out = Array2::zeros((dim, dim));
    for j in 0..dim {
        let mut a = vec![Complex64::new(0.0, 0.0); dim];
        a[j] = Complex64::new(1.0, 0.0);
        let col = project_antisym(&apply_u2(&embed_antisym(&a, yr), p, params, yr), yr);
        for (i, v) in col.into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    out
}

/// One accepted eigenpair of the truncated pair step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundStateRecord {
    pub p: f64,
    /// Eigenphase in `(-pi, pi]`.
    pub omega: f64,
    /// Decay length of the eigenvector envelope in the relative
    /// coordinate, from a fit to its exponential flank; for compactly
    /// supported eigenvectors, the envelope's root-mean-square radius.
    pub loc_length: f64,
    /// `l2` residual of the refined eigenpair.
    pub residual: f64,
}

/// Envelope of an antisymmetric vector: the block norm at each `y >= 0`.
fn envelope(a: &[Complex64], y_radius: u64) -> Vec<f64> {
    let mut f = Vec::with_capacity(y_radius as usize + 1);
    f.push(a[0].norm());
    for y in 1..=y_radius as i64 {
        let s: f64 = (0..4)
            .map(|w| a[antisym_slot(y, w)].norm_sqr())
            .sum();
        f.push(s.sqrt());
    }
    f
}

/// Least-squares decay length over the envelope's falling flank, taken
/// from the peak down to ten decades below it. Stopping well above
/// machine noise keeps the fit off the numerical floor that sharply
/// localized vectors leave across the rest of the window; `None` when
/// the vector does not decay.
fn localization_length(f: &[f64]) -> Option<f64> {
    let fmax = f.iter().cloned().fold(0.0, f64::max);
    if fmax == 0.0 {
        return None;
    }
    let peak = f.iter().position(|&v| v == fmax)?;
    let pts: Vec<(f64, f64)> = f
        .iter()
        .enumerate()
        .skip(peak)
        .filter(|&(_, &v)| v > 1e-10 * fmax && v < 0.1 * fmax)
        .map(|(y, &v)| (y as f64, v.ln()))
        .collect();
    if pts.len() < 3 || pts[pts.len() - 1].0 - pts[0].0 < 2.0 {
        // No measurable flank. A compactly supported vector still counts
        // as localized; report its root-mean-square radius instead.
        let support_end = f.iter().rposition(|&v| v > 1e-10 * fmax)?;
        if support_end > peak + 4 {
            return None;
        }
        let w2: f64 = f
            .iter()
            .enumerate()
            .map(|(y, &v)| (y * y) as f64 * v * v)
            .sum();
        let n2: f64 = f.iter().map(|&v| v * v).sum();
        return Some((w2 / n2).sqrt());
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if slope < 0.0 {
        Some(-1.0 / slope)
    } else {
        None
    }
}

const UNIT_MODULUS_TOL: f64 = 1e-6;
const RESIDUAL_TOL: f64 = 1e-8;
const BOUNDARY_TOL: f64 = 1e-8;
const COARSE_RADIUS: u64 = 48;
const CLUSTER_TOL: f64 = 1e-9;

/// Unit-modulus eigenpairs of the coarse operator, clustered by complex
/// eigenvalue distance. A cluster of size one is an isolated candidate; a
/// larger cluster signals a flat band.
fn coarse_candidates(
    p: f64,
    params: &WalkParams,
    y_coarse: u64,
) -> Vec<(Complex64, Vec<Vec<Complex64>>)> {
    let reduced = reduced_operator(p, params, y_coarse);
    let (eigs, vecs) = reduced.eig().expect("dense eigensolve of the coarse operator");
    let mut pairs: Vec<(Complex64, Vec<Complex64>)> = Vec::new();
    for (j, lam) in eigs.iter().enumerate() {
        if (lam.norm() - 1.0).abs() <= UNIT_MODULUS_TOL {
            pairs.push((*lam, vecs.column(j).to_vec()));
        }
    }
    pairs.sort_by(|a, b| a.0.arg().total_cmp(&b.0.arg()));
    let mut clusters: Vec<(Complex64, Vec<Vec<Complex64>>)> = Vec::new();
    for (lam, v) in pairs {
        match clusters.iter_mut().find(|(l0, _)| (*l0 - lam).norm() <= CLUSTER_TOL) {
            Some((_, members)) => members.push(v),
            None => clusters.push((lam, vec![v])),
        }
    }
    clusters
}

/// Refines a coarse eigenpair on the full-size antisymmetric operator by
/// inverse iteration with the coarse eigenvalue as shift.
fn refine(
    reduced: &Array2<Complex64>,
    y_radius: u64,
    y_coarse: u64,
    lam0: Complex64,
    v0: &[Complex64],
) -> Option<Array1<Complex64>> {
    let dim = antisym_dim(y_radius);
    let mut shifted = reduced.clone();
    for i in 0..dim {
        shifted[(i, i)] -= lam0;
    }
    let lu = shifted.factorize_into().ok()?;
    let mut x = Array1::zeros(dim);
    x[0] = v0[0];
    for y in 1..=y_coarse.min(y_radius) as i64 {
        for w in 0..4 {
            x[antisym_slot(y, w)] = v0[antisym_slot(y, w)];
        }
    }
    for _ in 0..4 {
        let solved = lu.solve_into(x).ok()?;
        let norm = solved.norm_l2();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        x = solved / Complex64::new(norm, 0.0);
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// A localized representative from a degenerate cluster. Every vector in
/// the cluster span is an eigenvector to within the cluster width, so the
/// combination with the smallest spatial second moment is the most
/// concentrated one the eigenspace admits. The outermost rows of the
/// coarse window are then clipped to zero so the vector zero-pads into
/// any larger window without picking up boundary error; if clipping
/// removes noticeable weight the eigenspace holds nothing localized and
/// the cluster is dropped.
fn localized_cluster_rep(members: &[Vec<Complex64>], y_coarse: u64) -> Option<Vec<Complex64>> {
    let dim = antisym_dim(y_coarse);
    let mut stacked = Array2::zeros((dim, members.len()));
    for (j, m) in members.iter().enumerate() {
        for i in 0..dim {
            stacked[(i, j)] = m[i];
        }
    }
    let (u, s, _) = stacked.svd(true, false).ok()?;
    let u = u?;
    let rank = s.iter().take_while(|&&x| x > 1e-8 * s[0]).count();
    if rank == 0 {
        return None;
    }
    let mut weights = vec![0.0f64; dim];
    for y in 1..=y_coarse as i64 {
        let w2 = (y as f64 / y_coarse as f64).powi(2);
        for w in 0..4 {
            weights[antisym_slot(y, w)] = w2;
        }
    }
    let mut moment = Array2::zeros((rank, rank));
    for a in 0..rank {
        for b in 0..rank {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..dim {
                acc += u[(i, a)].conj() * u[(i, b)] * weights[i];
            }
            moment[(a, b)] = acc;
        }
    }
    let (_, combos) = moment.eigh(UPLO::Lower).ok()?;
    // Some LAPACK wrappers hand the Hermitian eigenvector matrix back
    // conjugated; building both readings and keeping the one whose
    // measured moment is smaller sidesteps the convention.
    let build = |conj: bool| {
        let mut rep = vec![Complex64::new(0.0, 0.0); dim];
        for (i, r) in rep.iter_mut().enumerate() {
            for a in 0..rank {
                let c0 = combos[(a, 0)];
                *r += u[(i, a)] * if conj { c0.conj() } else { c0 };
            }
        }
        rep
    };
    let measured = |rep: &[Complex64]| -> f64 {
        rep.iter().zip(&weights).map(|(x, w)| w * x.norm_sqr()).sum()
    };
    let plain = build(false);
    let conjugated = build(true);
    let mut rep = if measured(&plain) <= measured(&conjugated) {
        plain
    } else {
        conjugated
    };
    let mut clipped = 0.0f64;
    for y in (y_coarse as i64 - 3)..=y_coarse as i64 {
        for w in 0..4 {
            let slot = antisym_slot(y, w);
            clipped += rep[slot].norm_sqr();
            rep[slot] = Complex64::new(0.0, 0.0);
        }
    }
    let norm: f64 = rep.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || clipped.sqrt() > 1e-9 * norm {
        return None;
    }
    for x in rep.iter_mut() {
        *x /= Complex64::new(norm, 0.0);
    }
    Some(rep)
}

/// Scans a momentum grid for localized unit-modulus eigenpairs of the
/// truncated pair step; see [`bound_state_scan`].
pub fn bound_state_scan_with_exec(
    p_grid: &[f64],
    params: &WalkParams,
    y_radius: u64,
    exec: Exec,
) -> Result<Vec<BoundStateRecord>> {
    if params.m() == 0.0 || params.n() == 0.0 {
        return Err(Error::InvalidParameter(
            "the blocked pair kernel is singular at zero or unit mass".into(),
        ));
    }
    if y_radius < 8 {
        return Err(Error::InvalidParameter(format!(
            "scan radius must be at least 8, got {y_radius}"
        )));
    }
    let y_coarse = COARSE_RADIUS.min(y_radius);
    let per_p = map_indexed(exec, p_grid.len(), |i| {
        let p = p_grid[i];
        let mut records: Vec<BoundStateRecord> = Vec::new();
        let clusters = coarse_candidates(p, params, y_coarse);
        if clusters.is_empty() {
            return records;
        }
        let reduced = reduced_operator(p, params, y_radius);
        let dim = antisym_dim(y_radius);
        for (lam0, members) in clusters {
            let candidate = if members.len() == 1 {
                let v0 = &members[0];
                let f = envelope(v0, y_coarse);
                let fmax = f.iter().cloned().fold(0.0, f64::max);
                let tail = f[f.len() - 4..].iter().cloned().fold(0.0, f64::max);
                if tail < 1e-5 * fmax {
                    refine(&reduced, y_radius, y_coarse, lam0, v0)
                } else {
                    None
                }
            } else {
                localized_cluster_rep(&members, y_coarse).map(|rep| {
                    let mut x = Array1::zeros(dim);
                    for (i, v) in rep.into_iter().enumerate() {
                        x[i] = v;
                    }
                    x
                })
            };
            let Some(x) = candidate else {
                continue;
            };
            let ax = reduced.dot(&x);
            let lam: Complex64 = x.iter().zip(ax.iter()).map(|(a, b)| a.conj() * b).sum();
            if (lam.norm() - 1.0).abs() > UNIT_MODULUS_TOL {
                continue;
            }
            let residual = (&ax - &(&x * lam)).norm_l2();
            if !residual.is_finite() || residual > RESIDUAL_TOL {
                continue;
            }
            let x = x.to_vec();
            let f = envelope(&x, y_radius);
            let fmax = f.iter().cloned().fold(0.0, f64::max);
            let boundary = f[f.len() - 8..].iter().cloned().fold(0.0, f64::max);
            if boundary > BOUNDARY_TOL * fmax {
                continue;
            }
            let Some(loc_length) = localization_length(&f) else {
                continue;
            };
            let omega = lam.arg();
            if records
                .iter()
                .any(|r| (r.omega - omega).abs() < 1e-8 || ((r.omega - omega).abs() - 2.0 * std::f64::consts::PI).abs() < 1e-8)
            {
                continue;
            }
            records.push(BoundStateRecord {
                p,
                omega,
                loc_length,
                residual,
            });
        }
        records.sort_by(|a, b| a.omega.total_cmp(&b.omega));
        records
    });
    Ok(per_p.into_iter().flatten().collect())
}

/// Parallel scan over the momentum grid with default execution.
pub fn bound_state_scan(
    p_grid: &[f64],
    params: &WalkParams,
    y_radius: u64,
) -> Result<Vec<BoundStateRecord>> {
    bound_state_scan_with_exec(p_grid, params, y_radius, Exec::Parallel)
}

/// The default scan grid: 64 uniform momenta in `[-pi, pi)`.
pub fn default_p_grid() -> Vec<f64> {
    let n = 64;
    (0..n)
        .map(|j| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / n as f64)
        .collect()
}
