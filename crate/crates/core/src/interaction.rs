//! Expansion of the interacting pair evolution in the number of phase
//! insertions.
//!
//! Writing one step as `W_2 J` and splitting `J = I + (J - I)`, the `T`-step
//! evolution decomposes into a free term plus operators `U^(k)` that insert
//! the diagonal `J - I` exactly `k` times. A schedule `(a_0, ..., a_k)`
//! records the free-step blocks around the insertions: `a_0` steps before
//! the first one, then gaps `a_1, ..., a_{k-1}`, with `a_k >= 1` steps
//! closing the evolution (the schedule product reads right to left in
//! time, so insertion `i` fires at time `a_0 + ... + a_{i-1}`).
//!
//! Two independent computations of the same matrix elements are kept side
//! by side: an operator route that carries all orders through the dense
//! pair space in one pass, and a path-sum route that enumerates interaction
//! vertices in space-time and multiplies free propagators between them.
//! Their agreement is the main correctness check of the module.

use ndarray::Array2;
use num_complex::Complex64;

use crate::algebra::{forced_final_bit, BinLabel, Bit, WalkParams};
use crate::error::{Error, Result};
use crate::free::pathsum_propagator;
use crate::pair::{PairBoundary, PairSpace};
use crate::par::{map_indexed, Exec};

/// Hard cap on vertex-chain enumeration; beyond this the chain count
/// grows too fast to be useful.
pub const CHAIN_MAX_STEPS: u64 = 8;

/// Free-step block lengths `(a_0, ..., a_k)` around `k` phase insertions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InteractionSchedule {
    alphas: Vec<u64>,
}

impl InteractionSchedule {
    pub fn alphas(&self) -> &[u64] {
        &self.alphas
    }

    /// Number of insertions, one less than the block count.
    pub fn order(&self) -> u64 {
        (self.alphas.len() - 1) as u64
    }

    pub fn steps(&self) -> u64 {
        self.alphas.iter().sum()
    }

    /// Times at which the insertions fire: partial sums of the leading
    /// blocks. The first block may be empty, later ones cannot, so the
    /// times are strictly increasing within `0..steps`.
    pub fn vertex_times(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.alphas.len() - 1);
        let mut acc = 0;
        for &a in &self.alphas[..self.alphas.len() - 1] {
            acc += a;
            out.push(acc);
        }
        out
    }
}

/// All schedules of `k` insertions over `t` steps: block sums equal `t`,
/// every block after the first is nonempty. Lexicographically ordered.
/// `k = 0` yields the single free schedule; `k > t` yields none.
pub fn compositions(t: u64, k: u64) -> Vec<InteractionSchedule> {
    if k == 0 {
        return vec![InteractionSchedule { alphas: vec![t] }];
    }
    if k > t {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut alphas = Vec::with_capacity(k as usize + 1);
    gen_blocks(&mut alphas, t, k + 1, &mut out);
    out
}

fn gen_blocks(
    alphas: &mut Vec<u64>,
    remaining: u64,
    parts_left: u64,
    out: &mut Vec<InteractionSchedule>,
) {
    if parts_left == 0 {
        if remaining == 0 {
            out.push(InteractionSchedule {
                alphas: alphas.clone(),
            });
        }
        return;
    }
    let min = if alphas.is_empty() { 0 } else { 1 };
    let reserve = parts_left - 1;
    if remaining < min + reserve {
        return;
    }
    for v in min..=remaining - reserve {
        alphas.push(v);
        gen_blocks(alphas, remaining - v, parts_left - 1, out);
        alphas.pop();
    }
}

/// The 4x4 slot-swap on the internal pair space, `E(u ox v) = v ox u`;
/// equal to half the sum of Pauli-matrix squares tensored with themselves.
pub fn exchange_operator() -> Array2<Complex64> {
    let mut e = Array2::zeros((4, 4));
    for b1 in 0..2usize {
        for b2 in 0..2usize {
            e[(2 * b2 + b1, 2 * b1 + b2)] = Complex64::new(1.0, 0.0);
        }
    }
    e
}

/// Evolves `v0` for `t` interacting steps while tracking every insertion
/// order up to `k_max`; entry `k` of the result is the order-`k` component
/// of the evolved vector.
pub fn order_k_apply(
    space: &PairSpace,
    params: &WalkParams,
    t: u64,
    k_max: u64,
    v0: &[Complex64],
) -> Vec<Vec<Complex64>> {
    let mut orders: Vec<Vec<Complex64>> = Vec::with_capacity(k_max as usize + 1);
    orders.push(v0.to_vec());
    for _ in 0..k_max {
        orders.push(space.zeros());
    }
    for _ in 0..t {
        for k in (0..orders.len()).rev() {
            let mut acc = orders[k].clone();
            if k > 0 {
                let inserted = space.apply_j_minus_one(&orders[k - 1], params);
                for (a, b) in acc.iter_mut().zip(&inserted) {
                    *a += b;
                }
            }
            orders[k] = space.apply_w2(&acc, params);
        }
    }
    orders
}

/// Dense order-`k` operator on a ring, returned as columns. The ring must
/// keep the full matrix affordable.
pub fn order_k_operator(
    t: u64,
    k: u64,
    params: &WalkParams,
    ring: u64,
) -> Result<Vec<Vec<Complex64>>> {
    let space = PairSpace::new(ring)?;
    let dim = space.dim();
    if dim > 4096 {
        return Err(Error::ResourceCap(format!(
            "dense operator of dimension {dim} exceeds the cap of 4096"
        )));
    }
    let cols = map_indexed(Exec::Parallel, dim, |j| {
        let mut v = space.zeros();
        v[j] = Complex64::new(1.0, 0.0);
        let mut orders = order_k_apply(&space, params, t, k, &v);
        orders.swap_remove(k as usize)
    });
    Ok(cols)
}

/// Largest entrywise deviation between the exact `t`-step evolution and
/// the sum of all insertion orders, streamed column by column.
pub fn expansion_defect(ring: u64, params: &WalkParams, t: u64, exec: Exec) -> Result<f64> {
    let space = PairSpace::new(ring)?;
    let dim = space.dim();
    let defects = map_indexed(exec, dim, |j| {
        let mut v = space.zeros();
        v[j] = Complex64::new(1.0, 0.0);
        let orders = order_k_apply(&space, params, t, t, &v);
        let mut exact = v;
        for _ in 0..t {
            exact = space.step(&exact, params, true);
        }
        let mut worst: f64 = 0.0;
        for (i, e) in exact.iter().enumerate() {
            let summed: Complex64 = orders.iter().map(|o| o[i]).sum();
            worst = worst.max((e - summed).norm());
        }
        worst
    });
    Ok(defects.into_iter().fold(0.0, f64::max))
}

/// One labelled term of an internal-space operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorTerm {
    pub coeff: Complex64,
    /// Matrix units for slot 1 and slot 2.
    pub labels: (BinLabel, BinLabel),
}

fn kron_units(l1: BinLabel, l2: BinLabel) -> Array2<Complex64> {
    let mut m = Array2::zeros((4, 4));
    m[(
        2 * l1.out_bit as usize + l2.out_bit as usize,
        2 * l1.in_bit as usize + l2.in_bit as usize,
    )] = Complex64::new(1.0, 0.0);
    m
}

/// Co-location support pattern of the insertion on the internal space:
/// 1 on the two opposite-chirality cells.
fn opposite_chirality_projector() -> Array2<Complex64> {
    let mut p = Array2::zeros((4, 4));
    p[(1, 1)] = Complex64::new(1.0, 0.0);
    p[(2, 2)] = Complex64::new(1.0, 0.0);
    p
}

/// Internal-space skeleton of a `k`-vertex insertion chain with exchange
/// amputation: the opposite-chirality pattern is dressed as
/// `(I-E) P (I-E)` at every vertex, the given matrix units fill the `k-1`
/// segments between vertices (time ordered), and the whole product is
/// scaled by `(e^(i chi) - 1)^k / 2^k`.
pub fn amputated_matrix(internal_labels: &[(BinLabel, BinLabel)], chi: f64) -> Array2<Complex64> {
    let k = internal_labels.len() + 1;
    let e = exchange_operator();
    let one: Array2<Complex64> = Array2::eye(4);
    let sandwich = (&one - &e).dot(&opposite_chirality_projector()).dot(&(&one - &e));
    let mut acc = sandwich.clone();
    for &(l1, l2) in internal_labels {
        acc = sandwich.dot(&kron_units(l1, l2)).dot(&acc);
    }
    let phase = Complex64::from_polar(1.0, chi) - Complex64::new(1.0, 0.0);
    let scale = (phase / 2.0).powi(k as i32);
    acc.mapv(|x| x * scale)
}

/// The same skeleton decomposed into labelled matrix-unit terms; zero
/// entries are dropped.
pub fn amputated_terms(internal_labels: &[(BinLabel, BinLabel)], chi: f64) -> Vec<OperatorTerm> {
    let m = amputated_matrix(internal_labels, chi);
    let mut out = Vec::new();
    for r in 0..4 {
        for c in 0..4 {
            let coeff = m[(r, c)];
            if coeff.norm() > 0.0 {
                out.push(OperatorTerm {
                    coeff,
                    labels: (
                        BinLabel::new((r / 2) as Bit, (c / 2) as Bit),
                        BinLabel::new((r % 2) as Bit, (c % 2) as Bit),
                    ),
                });
            }
        }
    }
    out
}

/// Space-time interaction sites `(site, time)` with strictly increasing
/// times.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexChain {
    pub vertices: Vec<(i64, u64)>,
}

/// All chains of `k` vertices that both walkers can pass through: every
/// vertex inside the causal diamond of all four boundary sites, and
/// consecutive vertices within reach of each other. Geometric only; bit
/// assignments are left to the amplitude assembly.
pub fn enumerate_vertex_chains(
    x_in: i64,
    y_in: i64,
    x_out: i64,
    y_out: i64,
    t: u64,
    k: u64,
) -> Result<Vec<VertexChain>> {
    if t > CHAIN_MAX_STEPS {
        return Err(Error::ResourceCap(format!(
            "vertex enumeration capped at {CHAIN_MAX_STEPS} steps, asked for {t}"
        )));
    }
    let ti = t as i64;
    let in_diamond = |z: i64, tau: i64| {
        (z - x_in).abs() <= tau
            && (z - y_in).abs() <= tau
            && (x_out - z).abs() <= ti - tau
            && (y_out - z).abs() <= ti - tau
    };
    let mut out = Vec::new();
    let mut chain: Vec<(i64, u64)> = Vec::with_capacity(k as usize);
    fn extend(
        chain: &mut Vec<(i64, u64)>,
        k: usize,
        t: i64,
        in_diamond: &dyn Fn(i64, i64) -> bool,
        span: (i64, i64),
        out: &mut Vec<VertexChain>,
    ) {
        if chain.len() == k {
            out.push(VertexChain {
                vertices: chain.clone(),
            });
            return;
        }
        let tau_min = chain.last().map_or(0, |&(_, tau)| tau as i64 + 1);
        // Leave room for the remaining vertices at distinct later times.
        let remaining = (k - chain.len() - 1) as i64;
        for tau in tau_min..=(t - 1 - remaining) {
            for z in span.0..=span.1 {
                if !in_diamond(z, tau) {
                    continue;
                }
                if let Some(&(zp, taup)) = chain.last() {
                    if (z - zp).abs() > tau - taup as i64 {
                        continue;
                    }
                }
                chain.push((z, tau as u64));
                extend(chain, k, t, in_diamond, span, out);
                chain.pop();
            }
        }
    }
    if k == 0 {
        out.push(VertexChain { vertices: vec![] });
        return Ok(out);
    }
    let span = (x_in.min(y_in) - ti, x_in.max(y_in) + ti);
    extend(&mut chain, k as usize, ti, &in_diamond, span, &mut out);
    Ok(out)
}

/// Chain enumeration with the crossing-parity filter: when the boundary
/// order of the two walkers is strict on both ends, an order flip needs an
/// odd number of interactions and a preserved order an even number, so a
/// mismatched `k` returns no chains. Boundaries with a shared endpoint
/// site are not filtered.
pub fn enumerate_vertex_chains_filtered(
    x_in: i64,
    y_in: i64,
    x_out: i64,
    y_out: i64,
    t: u64,
    k: u64,
    crossing_parity: bool,
) -> Result<Vec<VertexChain>> {
    if crossing_parity && x_in != y_in && x_out != y_out {
        let flipped = (x_in < y_in) != (x_out < y_out);
        if (k % 2 == 1) != flipped {
            return Ok(Vec::new());
        }
    }
    enumerate_vertex_chains(x_in, y_in, x_out, y_out, t, k)
}

/// Matrix element of the order-`k` operator between tensor basis states,
/// assembled as a sum over interaction vertex chains.
///
/// Each segment contributes one free propagator per walker; the endpoint
/// bits at every vertex are forced by the segment data, and the insertion
/// kills chains where the two walkers would meet with equal bits. Every
/// surviving chain carries the factor `(e^(i chi) - 1)^k`.
pub fn order_k_amplitude_pathsum(
    boundary: &PairBoundary,
    t: u64,
    k: u64,
    params: &WalkParams,
) -> Result<Complex64> {
    let free = |x0: i64, b0: Bit, x1: i64, b1: Bit, dt: u64| {
        pathsum_propagator(x0, b0, x1, b1, dt, params)
    };
    if k == 0 {
        return Ok(free(boundary.x_in, boundary.a1, boundary.x_out, boundary.b1, t)
            * free(boundary.y_in, boundary.a2, boundary.y_out, boundary.b2, t));
    }
    let chains = enumerate_vertex_chains(
        boundary.x_in,
        boundary.y_in,
        boundary.x_out,
        boundary.y_out,
        t,
        k,
    )?;
    let mut total = Complex64::new(0.0, 0.0);
    'chain: for chain in &chains {
        let mut pos_a = boundary.x_in;
        let mut bit_a = boundary.a1;
        let mut pos_b = boundary.y_in;
        let mut bit_b = boundary.a2;
        let mut tau_prev = 0u64;
        let mut amp = Complex64::new(1.0, 0.0);
        for &(z, tau) in &chain.vertices {
            let dt = tau - tau_prev;
            let (ca, cb) = if dt == 0 {
                // Only possible for a vertex at time zero: the walkers must
                // already sit there.
                if z != pos_a || z != pos_b {
                    continue 'chain;
                }
                (bit_a, bit_b)
            } else {
                (
                    forced_final_bit(dt, pos_a, z, bit_a),
                    forced_final_bit(dt, pos_b, z, bit_b),
                )
            };
            if ca == cb {
                continue 'chain;
            }
            if dt > 0 {
                amp *= free(pos_a, bit_a, z, ca, dt) * free(pos_b, bit_b, z, cb, dt);
                if amp == Complex64::new(0.0, 0.0) {
                    continue 'chain;
                }
            }
            pos_a = z;
            bit_a = ca;
            pos_b = z;
            bit_b = cb;
            tau_prev = tau;
        }
        let dt = t - tau_prev;
        amp *= free(pos_a, bit_a, boundary.x_out, boundary.b1, dt)
            * free(pos_b, bit_b, boundary.y_out, boundary.b2, dt);
        total += amp;
    }
    let phase = Complex64::from_polar(1.0, params.chi()) - Complex64::new(1.0, 0.0);
    Ok(total * phase.powi(k as i32))
}

/// One row of the exported order-by-order amplitude table.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderKRow {
    pub t: u64,
    pub k: u64,
    pub boundary: PairBoundary,
    pub amplitude: Complex64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::binom;

    #[test]
    fn composition_examples() {
        let got = compositions(3, 2);
        let alphas: Vec<&[u64]> = got.iter().map(|s| s.alphas()).collect();
        assert_eq!(alphas, vec![&[0, 1, 2][..], &[0, 2, 1][..], &[1, 1, 1][..]]);
        let full = compositions(4, 4);
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].alphas(), &[0, 1, 1, 1, 1]);
        assert!(compositions(3, 4).is_empty());
        let free = compositions(5, 0);
        assert_eq!(free[0].alphas(), &[5]);
    }

    #[test]
    fn composition_count_is_binomial() {
        for t in 1..=9u64 {
            for k in 1..=t {
                assert_eq!(
                    compositions(t, k).len() as i64,
                    binom(t as i64, k as i64),
                    "t={t} k={k}"
                );
            }
        }
    }

    #[test]
    fn schedule_vertex_times_cover_subsets() {
        // The vertex-time map must biject schedules with k-subsets of
        // 0..t.
        let t = 6u64;
        for k in 1..=t {
            let mut seen: Vec<Vec<u64>> = compositions(t, k)
                .iter()
                .map(|s| s.vertex_times())
                .collect();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len() as i64, binom(t as i64, k as i64));
            for times in &seen {
                assert!(times.windows(2).all(|w| w[0] < w[1]));
                assert!(times.iter().all(|&tau| tau < t));
            }
        }
    }

    #[test]
    fn exchange_is_a_swap_and_involution() {
        let e = exchange_operator();
        // e_R ox e_L -> e_L ox e_R: column 1 maps to row 2.
        assert_eq!(e[(2, 1)], Complex64::new(1.0, 0.0));
        assert_eq!(e[(1, 1)], Complex64::new(0.0, 0.0));
        let e2 = e.dot(&e);
        for r in 0..4 {
            for c in 0..4 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((e2[(r, c)] - Complex64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
        // Half the Pauli square sum.
        let paulis: [[[Complex64; 2]; 2]; 4] = [
            [
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ],
            [
                [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            ],
            [
                [Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0)],
                [Complex64::new(0.0, 1.0), Complex64::new(0.0, 0.0)],
            ],
            [
                [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
            ],
        ];
        let mut sum = Array2::<Complex64>::zeros((4, 4));
        for s in &paulis {
            for r1 in 0..2 {
                for c1 in 0..2 {
                    for r2 in 0..2 {
                        for c2 in 0..2 {
                            sum[(2 * r1 + r2, 2 * c1 + c2)] += s[r1][c1] * s[r2][c2];
                        }
                    }
                }
            }
        }
        for r in 0..4 {
            for c in 0..4 {
                assert!((0.5 * sum[(r, c)] - e[(r, c)]).norm() < 1e-15);
            }
        }
        // (I - E)/2 projects onto a one-dimensional subspace.
        let one: Array2<Complex64> = Array2::eye(4);
        let pa = (&one - &e).mapv(|x| x * Complex64::new(0.5, 0.0));
        let trace: Complex64 = (0..4).map(|i| pa[(i, i)]).sum();
        assert!((trace - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let pa2 = pa.dot(&pa);
        for r in 0..4 {
            for c in 0..4 {
                assert!((pa2[(r, c)] - pa[(r, c)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn schedule_products_reproduce_dp_orders() {
        // Build U^(k) from the schedule formula directly and compare with
        // the single-pass accumulation.
        let params = WalkParams::new(0.45, 0.9).unwrap();
        let ring = 9;
        let space = PairSpace::new(ring).unwrap();
        let t = 4u64;
        for k in 0..=t {
            let schedules = compositions(t, k);
            for col in [0usize, 37, 101] {
                let mut v0 = space.zeros();
                v0[col] = Complex64::new(1.0, 0.0);
                let dp = order_k_apply(&space, &params, t, k, &v0)
                    .swap_remove(k as usize);
                let mut explicit = space.zeros();
                for s in &schedules {
                    let times = s.vertex_times();
                    let mut v = v0.clone();
                    for tau in 0..t {
                        if times.contains(&tau) {
                            v = space.apply_j_minus_one(&v, &params);
                        }
                        v = space.apply_w2(&v, &params);
                    }
                    for (a, b) in explicit.iter_mut().zip(&v) {
                        *a += b;
                    }
                }
                for (a, b) in dp.iter().zip(&explicit) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn orders_vanish_without_coupling() {
        let params = WalkParams::new(0.5, 0.0).unwrap();
        let cols = order_k_operator(3, 2, &params, 8).unwrap();
        for col in &cols {
            for a in col {
                assert!(a.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn expansion_sums_to_exact_evolution() {
        let params = WalkParams::new(0.7, 2.2).unwrap();
        let defect = expansion_defect(9, &params, 4, Exec::Sequential).unwrap();
        assert!(defect < 1e-12, "defect {defect}");
    }

    #[test]
    fn amputated_first_order_is_antisymmetrized_pattern() {
        let chi = 1.3;
        let phase = Complex64::from_polar(1.0, chi) - Complex64::new(1.0, 0.0);
        let m = amputated_matrix(&[], chi);
        // 2 (e^(i chi) - 1) times the antisymmetric projector.
        let e = exchange_operator();
        let one: Array2<Complex64> = Array2::eye(4);
        let pa = (&one - &e).mapv(|x| x * Complex64::new(0.5, 0.0));
        for r in 0..4 {
            for c in 0..4 {
                let expect = 2.0 * phase * pa[(r, c)];
                assert!((m[(r, c)] - expect).norm() < 1e-14);
            }
        }
        // chi = 0 kills every order.
        let z = amputated_matrix(&[(BinLabel::new(0, 1), BinLabel::new(1, 0))], 0.0);
        assert!(z.iter().all(|x| x.norm() < 1e-15));
    }

    #[test]
    fn amputated_equal_chirality_labels_vanish() {
        let chi = 0.8;
        for j in 0..2u8 {
            for m_ in 0..2u8 {
                // Equal chiralities entering the later vertex: i_n = l_n.
                let t = amputated_terms(&[(BinLabel::new(0, j), BinLabel::new(0, m_))], chi);
                assert!(t.is_empty(), "labels W0{j} W0{m_} should be killed");
                let t = amputated_terms(&[(BinLabel::new(1, j), BinLabel::new(1, m_))], chi);
                assert!(t.is_empty());
            }
        }
        // Opposite chiralities on both sides survive.
        let t = amputated_terms(&[(BinLabel::new(0, 1), BinLabel::new(1, 0))], chi);
        assert!(!t.is_empty());
    }

    #[test]
    fn amputated_calibration_against_bare_insertions() {
        // Reference chain: the bare insertion pattern P at every vertex,
        // matrix units in between, ends projected antisymmetric.
        let chi = 0.9;
        let phase = Complex64::from_polar(1.0, chi) - Complex64::new(1.0, 0.0);
        let e = exchange_operator();
        let one: Array2<Complex64> = Array2::eye(4);
        let pa = (&one - &e).mapv(|x| x * Complex64::new(0.5, 0.0));
        let p = opposite_chirality_projector();
        let bare = |labels: &[(BinLabel, BinLabel)]| {
            let mut acc = p.clone();
            for &(l1, l2) in labels {
                acc = p.dot(&kron_units(l1, l2)).dot(&acc);
            }
            let k = labels.len() as i32 + 1;
            pa.dot(&acc).dot(&pa).mapv(|x| x * phase.powi(k))
        };
        // One and two vertices: the amputation multiplies each end vertex
        // by exactly 2.
        let m1 = amputated_matrix(&[], chi);
        let b1 = bare(&[]);
        for r in 0..4 {
            for c in 0..4 {
                assert!((m1[(r, c)] - 2.0 * b1[(r, c)]).norm() < 1e-14);
            }
        }
        let labels2 = [(BinLabel::new(0, 1), BinLabel::new(1, 0))];
        let m2 = amputated_matrix(&labels2, chi);
        let b2 = bare(&labels2);
        for r in 0..4 {
            for c in 0..4 {
                assert!((m2[(r, c)] - 4.0 * b2[(r, c)]).norm() < 1e-14);
            }
        }
        // Three vertices: the interior amputation also projects the
        // middle channel, so this chain carries 2 phase^3 on the
        // antisymmetric unit against 1/2 phase^3 for the bare pattern; a
        // naive factor 8 would overshoot by the interior's channel split.
        let labels3 = [
            (BinLabel::new(0, 1), BinLabel::new(1, 0)),
            (BinLabel::new(1, 0), BinLabel::new(0, 1)),
        ];
        let m3 = amputated_matrix(&labels3, chi);
        let b3 = bare(&labels3);
        let on_antisym = |m: &Array2<Complex64>| {
            let mut acc = Complex64::new(0.0, 0.0);
            let signs = [
                (1usize, Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)),
                (2usize, Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, 0.0)),
            ];
            for &(r, sr) in &signs {
                for &(c, sc) in &signs {
                    acc += sr.conj() * m[(r, c)] * sc;
                }
            }
            acc
        };
        let amp3 = on_antisym(&m3) / phase.powi(3);
        let bare3 = on_antisym(&b3) / phase.powi(3);
        assert!((amp3 - Complex64::new(2.0, 0.0)).norm() < 1e-13, "{amp3}");
        assert!((bare3 - Complex64::new(0.5, 0.0)).norm() < 1e-13, "{bare3}");
    }

    #[test]
    fn orders_rebase_the_phase_grading() {
        // e^(i j chi) = sum_k C(j, k) (e^(i chi) - 1)^k converts the
        // exact phase-power grading into insertion orders.
        let params = WalkParams::new(0.5, 1.9).unwrap();
        let t = 3u64;
        let b = PairBoundary {
            x_in: 0,
            a1: 0,
            y_in: 1,
            a2: 1,
            x_out: 0,
            b1: 1,
            y_out: 1,
            b2: 0,
        };
        let graded = crate::pair::pair_propagator_graded(t, &b).unwrap();
        let phase = params.interaction_phase() - Complex64::new(1.0, 0.0);
        for k in 0..=t {
            let mut predict = Complex64::new(0.0, 0.0);
            for (f, j, count) in graded.terms() {
                let weight = binom(j as i64, k as i64);
                if weight == 0 {
                    continue;
                }
                let im = Complex64::new(0.0, params.m());
                let base = im.powi(f as i32)
                    * Complex64::new(params.n(), 0.0).powi((2 * t - f) as i32);
                predict += Complex64::new((count * weight) as f64, 0.0) * base;
            }
            predict *= phase.powi(k as i32);
            let got = order_k_amplitude_pathsum(&b, t, k, &params).unwrap();
            assert!((predict - got).norm() < 1e-12, "k={k} {predict} {got}");
        }
    }

    #[test]
    fn chain_enumeration_small_geometry() {
        // Head-on light-like walkers meet at one place and time.
        let chains = enumerate_vertex_chains(0, 4, 4, 0, 4, 1).unwrap();
        let crossing: Vec<_> = chains
            .iter()
            .filter(|c| {
                let (z, tau) = c.vertices[0];
                z.abs() == tau as i64 && (z - 4).abs() == tau as i64
            })
            .collect();
        assert_eq!(crossing.len(), 1);
        assert_eq!(crossing[0].vertices[0], (2, 2));
        // Out-of-cone boundaries have no chains.
        assert!(enumerate_vertex_chains(0, 1, 9, 9, 2, 1).unwrap().is_empty());
        // Cap.
        assert!(enumerate_vertex_chains(0, 0, 0, 0, 9, 1).is_err());
    }

    #[test]
    fn chain_filter_uses_crossing_parity() {
        // Order preserved: odd k filtered out, even k kept.
        let kept = enumerate_vertex_chains_filtered(0, 3, 1, 2, 4, 2, true).unwrap();
        assert!(!kept.is_empty());
        let dropped = enumerate_vertex_chains_filtered(0, 3, 1, 2, 4, 1, true).unwrap();
        assert!(dropped.is_empty());
        let unfiltered = enumerate_vertex_chains_filtered(0, 3, 1, 2, 4, 1, false).unwrap();
        assert!(!unfiltered.is_empty());
        // Order flipped: odd k survives the filter.
        let crossed = enumerate_vertex_chains_filtered(0, 3, 2, 1, 4, 1, true).unwrap();
        assert!(!crossed.is_empty());
    }

    #[test]
    fn pathsum_matches_operator_on_samples() {
        let params = WalkParams::new(0.6, 1.7).unwrap();
        let t = 3u64;
        let ring = 4 * t + 4;
        let space = PairSpace::new(ring).unwrap();
        let offset = (2 * t + 2) as i64;
        // A couple of boundaries, including co-located input.
        let cases = [
            PairBoundary {
                x_in: 0,
                a1: 0,
                y_in: 0,
                a2: 1,
                x_out: 1,
                b1: 0,
                y_out: -1,
                b2: 1,
            },
            PairBoundary {
                x_in: 0,
                a1: 0,
                y_in: 2,
                a2: 1,
                x_out: 1,
                b1: 1,
                y_out: 0,
                b2: 0,
            },
        ];
        for b in &cases {
            let m_in = (
                crate::sector::Mode::new(b.x_in + offset, crate::algebra::Chirality::from_bit(b.a1)),
                crate::sector::Mode::new(b.y_in + offset, crate::algebra::Chirality::from_bit(b.a2)),
            );
            let mut v = space.zeros();
            v[space.index(m_in.0, m_in.1)] = Complex64::new(1.0, 0.0);
            let orders = order_k_apply(&space, &params, t, t, &v);
            let m_out = (
                crate::sector::Mode::new(b.x_out + offset, crate::algebra::Chirality::from_bit(b.b1)),
                crate::sector::Mode::new(b.y_out + offset, crate::algebra::Chirality::from_bit(b.b2)),
            );
            let out_idx = space.index(m_out.0, m_out.1);
            for k in 0..=t {
                let ps = order_k_amplitude_pathsum(b, t, k, &params).unwrap();
                let op = orders[k as usize][out_idx];
                assert!(
                    (ps - op).norm() < 1e-12,
                    "k={k} pathsum {ps} operator {op}"
                );
            }
        }
    }
}
