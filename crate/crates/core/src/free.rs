//! Free (non-interacting) walk: exact evolution on a ring, the closed-form
//! count of trajectories with a fixed flip number, and the path-sum
//! propagator built from it.
//!
//! One step multiplies a two-component wavefunction by the unitary that
//! shifts right movers one site right, left movers one site left, and mixes
//! the two components on site with amplitude `i m`. Between fixed endpoints
//! `(x_in, b_in)` and `(x_out, b_out)` every trajectory contributes the
//! monomial `(i m)^f n^(t - f)` where `f` is its flip count, so the full
//! matrix element of `W^t` is a polynomial whose integer coefficients are
//! trajectory counts. [`path_count_c`] produces those counts in closed form
//! and [`pathsum_propagator`] sums the series.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::algebra::{
    binom, binom_halves, forced_final_bit, Bit, BitPath, Chirality, WalkParams,
};
use crate::error::{Error, Result};

/// Hard cap on the trajectory enumeration: `t` beyond this would allocate
/// more than a few hundred million paths.
pub const MAX_ENUMERATION_STEPS: u64 = 20;

/// Number of `t`-step trajectories from `(x_in, b_in)` to `(x_out, b_out)`
/// with exactly `f` flips.
///
/// `b_out` and `b_in` index the matrix unit of the trajectory (final bit
/// first); the count is symmetric under swapping them. Boundary data whose
/// parities cannot be realized give 0, as does any `f` above the range
/// allowed by the displacement.
pub fn path_count_c(b_out: Bit, b_in: Bit, f: u64, x_in: i64, x_out: i64, t: u64) -> i64 {
    debug_assert!(b_out <= 1 && b_in <= 1);
    let d = x_out - x_in;
    let t_i = t as i64;
    if d.abs() > t_i {
        return 0;
    }
    if t == 0 {
        return i64::from(d == 0 && f == 0 && b_out == b_in);
    }
    // Flip parity must match the endpoint bits, and the endpoint bit must
    // match the one forced by (t, d, b_in).
    if (f % 2) as u8 != (b_out ^ b_in) || forced_final_bit(t, x_in, x_out, b_in) != b_out {
        return 0;
    }
    if f == 0 {
        // Straight transport: right movers need d = t, left movers d = -t.
        let straight = (b_in == 0 && d == t_i) || (b_in == 1 && d == -t_i);
        return i64::from(straight);
    }
    // nu = +1/2 for W11, -1/2 for W00, 0 otherwise; stored doubled, as are
    // mu_plus = (t + d - 1)/2 and mu_minus = (t - d - 1)/2.
    let nu2 = i64::from(b_out == 1 && b_in == 1) - i64::from(b_out == 0 && b_in == 0);
    let f_i = f as i64;
    let lhs = binom_halves(t_i + d - 1 - nu2, f_i - 1 - nu2);
    let rhs = binom_halves(t_i - d - 1 + nu2, f_i - 1 + nu2);
    lhs * rhs
}

/// Largest flip count compatible with displacement `x_out - x_in` in `t`
/// steps. Errors when the displacement is not reachable at all.
pub fn f_max(x_in: i64, x_out: i64, t: u64) -> Result<u64> {
    let d = (x_out - x_in).abs();
    if d > t as i64 {
        return Err(Error::Domain(format!(
            "displacement {} exceeds the light cone of {} steps",
            x_out - x_in,
            t
        )));
    }
    Ok(t - d as u64)
}

/// Flip counts that occur between the given endpoints, in decreasing
/// order. All values share the parity of `t + x_out - x_in`; the minimum
/// is 0 exactly on the light cone and 1 or 2 otherwise.
pub fn admissible_f(x_in: i64, x_out: i64, t: u64) -> Result<Vec<u64>> {
    let top = f_max(x_in, x_out, t)?;
    let min = match top {
        0 => 0,
        _ => {
            if top % 2 == 0 {
                2
            } else {
                1
            }
        }
    };
    Ok((min..=top).rev().step_by(2).collect())
}

/// Weight of a trajectory with `f` flips over `t` steps:
/// `(i m)^f n^(t - f)`.
pub fn alpha_factor(f: u64, t: u64, params: &WalkParams) -> Complex64 {
    assert!(f <= t);
    let i_pow = match f % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    i_pow * params.m().powi(f as i32) * params.n().powi((t - f) as i32)
}

/// Matrix element `<x_out, b_out| W^t |x_in, b_in>` on the infinite line,
/// computed as the flip-count series `sum_f alpha(f) c(f)`.
pub fn pathsum_propagator(
    x_in: i64,
    b_in: Bit,
    x_out: i64,
    b_out: Bit,
    t: u64,
    params: &WalkParams,
) -> Complex64 {
    if t == 0 {
        return Complex64::new(f64::from(x_in == x_out && b_in == b_out), 0.0);
    }
    let d = x_out - x_in;
    if d.abs() > t as i64 || forced_final_bit(t, x_in, x_out, b_in) != b_out {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let top = t - d.unsigned_abs();
    let mut f = u64::from(b_in ^ b_out);
    while f <= top {
        let c = path_count_c(b_out, b_in, f, x_in, x_out, t);
        if c != 0 {
            acc += alpha_factor(f, t, params) * c as f64;
        }
        f += 2;
    }
    acc
}

/// Sparse single-walker wavefunction on a ring of `ring` sites.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    ring: i64,
    amps: BTreeMap<(i64, Chirality), Complex64>,
}

impl WalkState {
    pub fn new(ring: u64) -> Result<WalkState> {
        if ring < 2 {
            return Err(Error::InvalidParameter(format!(
                "ring needs at least 2 sites, got {ring}"
            )));
        }
        Ok(WalkState {
            ring: ring as i64,
            amps: BTreeMap::new(),
        })
    }

    /// Point mass at one mode.
    pub fn basis(ring: u64, site: i64, chirality: Chirality) -> Result<WalkState> {
        let mut s = WalkState::new(ring)?;
        s.set(site, chirality, Complex64::new(1.0, 0.0))?;
        Ok(s)
    }

    pub fn ring(&self) -> u64 {
        self.ring as u64
    }

    pub fn set(&mut self, site: i64, chirality: Chirality, amp: Complex64) -> Result<()> {
        if site < 0 || site >= self.ring {
            return Err(Error::Domain(format!(
                "site {site} outside ring of {} sites",
                self.ring
            )));
        }
        if amp == Complex64::new(0.0, 0.0) {
            self.amps.remove(&(site, chirality));
        } else {
            self.amps.insert((site, chirality), amp);
        }
        Ok(())
    }

    pub fn amplitude(&self, site: i64, chirality: Chirality) -> Complex64 {
        self.amps
            .get(&(site, chirality))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Modes with nonzero amplitude, in `(site, chirality)` order.
    pub fn support(&self) -> impl Iterator<Item = ((i64, Chirality), Complex64)> + '_ {
        self.amps.iter().map(|(&k, &v)| (k, v))
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }
}

/// One free step: right movers hop right, left movers hop left, and the
/// mass term mixes the two components on site.
pub fn step_free(state: &WalkState, params: &WalkParams) -> WalkState {
    let l = state.ring;
    let mut amps: BTreeMap<(i64, Chirality), Complex64> = BTreeMap::new();
    let n = Complex64::new(params.n(), 0.0);
    let im = Complex64::new(0.0, params.m());
    for (&(x, c), &a) in &state.amps {
        let (hop, stay) = match c {
            Chirality::R => (((x + 1).rem_euclid(l), Chirality::R), (x, Chirality::L)),
            Chirality::L => (((x - 1).rem_euclid(l), Chirality::L), (x, Chirality::R)),
        };
        *amps.entry(hop).or_insert(Complex64::new(0.0, 0.0)) += n * a;
        *amps.entry(stay).or_insert(Complex64::new(0.0, 0.0)) += im * a;
    }
    amps.retain(|_, v| *v != Complex64::new(0.0, 0.0));
    WalkState {
        ring: state.ring,
        amps,
    }
}

/// Momentum-space block of the free step at wavenumber `k`, in the (R, L)
/// basis: `[[n e^(-ik), i m], [i m, n e^(ik)]]`.
pub fn momentum_matrix(k: f64, params: &WalkParams) -> [[Complex64; 2]; 2] {
    let n = params.n();
    let im = Complex64::new(0.0, params.m());
    [
        [Complex64::from_polar(n, -k), im],
        [im, Complex64::from_polar(n, k)],
    ]
}

/// All `t`-step trajectories from `x_in` to `x_out`, optionally pinned to
/// given endpoint bits, in lexicographic `(b_0, bits)` order.
///
/// The construction places the free 1 bits among the `t - 1` interior
/// positions, so the total count per endpoint-bit pair is a single
/// binomial. Capped at [`MAX_ENUMERATION_STEPS`] steps.
pub fn enumerate_bitpaths(
    x_in: i64,
    x_out: i64,
    t: u64,
    b_in: Option<Bit>,
    b_out: Option<Bit>,
) -> Result<Vec<BitPath>> {
    if t > MAX_ENUMERATION_STEPS {
        return Err(Error::ResourceCap(format!(
            "trajectory enumeration capped at {MAX_ENUMERATION_STEPS} steps, asked for {t}"
        )));
    }
    let d = x_out - x_in;
    let mut out = Vec::new();
    if t == 0 {
        if d == 0 {
            for b in 0..=1u8 {
                if b_in.unwrap_or(b) == b && b_out.unwrap_or(b) == b {
                    out.push(BitPath::new(x_in, vec![b]).unwrap());
                }
            }
        }
        return Ok(out);
    }
    if d.abs() > t as i64 {
        return Ok(out);
    }
    for b0 in 0..=1u8 {
        if b_in.is_some_and(|b| b != b0) {
            continue;
        }
        let bt = forced_final_bit(t, x_in, x_out, b0);
        if b_out.is_some_and(|b| b != bt) {
            continue;
        }
        // Weight (number of 1 bits) is fixed by the boundary data; the
        // interior ones can sit anywhere.
        let w2 = t as i64 - d + i64::from(b0) + i64::from(bt);
        if w2 % 2 != 0 {
            continue;
        }
        let w = w2 / 2;
        let interior = w - i64::from(b0) - i64::from(bt);
        let slots = t as i64 - 1;
        if interior < 0 || interior > slots {
            continue;
        }
        let mut picked: Vec<usize> = (0..interior as usize).collect();
        loop {
            let mut bits = vec![0u8; t as usize + 1];
            bits[0] = b0;
            bits[t as usize] = bt;
            for &p in &picked {
                bits[p + 1] = 1;
            }
            out.push(BitPath::new(x_in, bits).unwrap());
            if !next_combination(&mut picked, slots as usize) {
                break;
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Advances `picked` to the next k-subset of `0..n` in lexicographic
/// order; false once exhausted.
fn next_combination(picked: &mut [usize], n: usize) -> bool {
    let k = picked.len();
    for i in (0..k).rev() {
        if picked[i] < n - k + i {
            picked[i] += 1;
            for j in i + 1..k {
                picked[j] = picked[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// One row of the exported propagator table.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorRow {
    pub t: u64,
    pub x_in: i64,
    pub b_in: Bit,
    pub x_out: i64,
    pub b_out: Bit,
    pub amplitude: Complex64,
}

/// Propagator from the origin to every reachable mode for all `t` up to
/// `t_max`, ordered by `(t, b_in, x_out)`; the endpoint bit is the forced
/// one, so every admissible boundary appears exactly once per `t >= 1`.
pub fn propagator_table(t_max: u64, params: &WalkParams) -> Vec<PropagatorRow> {
    let mut rows = Vec::new();
    for b in 0..=1u8 {
        rows.push(PropagatorRow {
            t: 0,
            x_in: 0,
            b_in: b,
            x_out: 0,
            b_out: b,
            amplitude: Complex64::new(1.0, 0.0),
        });
    }
    for t in 1..=t_max {
        for b_in in 0..=1u8 {
            for x_out in -(t as i64)..=t as i64 {
                let b_out = forced_final_bit(t, 0, x_out, b_in);
                rows.push(PropagatorRow {
                    t,
                    x_in: 0,
                    b_in,
                    x_out,
                    b_out,
                    amplitude: pathsum_propagator(0, b_in, x_out, b_out, t, params),
                });
            }
        }
    }
    rows
}

/// Binomial predicted by the interior-placement argument: the number of
/// trajectories with fixed endpoints and endpoint bits.
pub fn boundary_path_count(x_in: i64, x_out: i64, t: u64, b_in: Bit, b_out: Bit) -> i64 {
    if t == 0 {
        return i64::from(x_in == x_out && b_in == b_out);
    }
    if forced_final_bit(t, x_in, x_out, b_in) != b_out {
        return 0;
    }
    let w2 = t as i64 - (x_out - x_in) + i64::from(b_in) + i64::from(b_out);
    if w2 % 2 != 0 {
        return 0;
    }
    binom(t as i64 - 1, w2 / 2 - i64::from(b_in) - i64::from(b_out))
}
