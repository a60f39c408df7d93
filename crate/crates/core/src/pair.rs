//! Dense two-walker tensor space with distinguishable slots.
//!
//! The interacting pair step factorizes as the on-site pair phase followed
//! by an independent free step for each slot. On the tensor product of two
//! one-walker spaces the phase is diagonal (it fires on cells where both
//! slots share a site with opposite chirality), so matrix-free application
//! is cheap. Antisymmetric amplitudes are recovered as direct minus
//! exchanged tensor elements, which makes this space the reference
//! implementation against which the sector evolution and both
//! perturbative expansions are checked.
//!
//! A graded twin of every operation records integer counts per
//! `(flips, phase power)` instead of complex numbers, providing exact
//! coefficients for the mass-expansion bookkeeping.

use num_complex::Complex64;

use crate::algebra::{Bit, GradedAmplitude, Letter, WalkParams};
use crate::error::{Error, Result};
use crate::sector::Mode;

/// Index bookkeeping for the tensor of two one-walker spaces on a ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairSpace {
    ring: i64,
}

impl PairSpace {
    pub fn new(ring: u64) -> Result<PairSpace> {
        if ring < 2 {
            return Err(Error::InvalidParameter(format!(
                "ring needs at least 2 sites, got {ring}"
            )));
        }
        if ring > 4096 {
            return Err(Error::ResourceCap(format!(
                "dense pair space on {ring} sites would exceed the size cap"
            )));
        }
        Ok(PairSpace { ring: ring as i64 })
    }

    pub fn ring(&self) -> u64 {
        self.ring as u64
    }

    /// Total dimension `4 * ring^2`.
    pub fn dim(&self) -> usize {
        4 * (self.ring * self.ring) as usize
    }

    fn mode_index(&self, m: Mode) -> usize {
        debug_assert!(m.site >= 0 && m.site < self.ring);
        (2 * m.site) as usize + m.chirality.bit() as usize
    }

    /// Flat index of the ordered cell `(slot 1, slot 2)`.
    pub fn index(&self, m1: Mode, m2: Mode) -> usize {
        self.mode_index(m1) * 2 * self.ring as usize + self.mode_index(m2)
    }

    /// Inverse of [`PairSpace::index`].
    pub fn modes(&self, idx: usize) -> (Mode, Mode) {
        let width = 2 * self.ring as usize;
        let (i1, i2) = (idx / width, idx % width);
        let unpack = |i: usize| {
            Mode::new(
                (i / 2) as i64,
                crate::algebra::Chirality::from_bit((i % 2) as Bit),
            )
        };
        (unpack(i1), unpack(i2))
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.dim()]
    }

    pub fn basis_vec(&self, m1: Mode, m2: Mode) -> Vec<Complex64> {
        let mut v = self.zeros();
        v[self.index(m1, m2)] = Complex64::new(1.0, 0.0);
        v
    }

    /// Whether the pair phase fires on this cell: shared site, opposite
    /// chirality.
    fn interacting_cell(&self, idx: usize) -> bool {
        let (m1, m2) = self.modes(idx);
        m1.site == m2.site && m1.chirality != m2.chirality
    }

    fn targets(&self, m: Mode) -> [(Mode, Letter); 2] {
        match m.chirality {
            crate::algebra::Chirality::R => [
                (
                    Mode::new((m.site + 1).rem_euclid(self.ring), m.chirality),
                    Letter::R,
                ),
                (Mode::new(m.site, m.chirality.flipped()), Letter::F),
            ],
            crate::algebra::Chirality::L => [
                (
                    Mode::new((m.site - 1).rem_euclid(self.ring), m.chirality),
                    Letter::L,
                ),
                (Mode::new(m.site, m.chirality.flipped()), Letter::F),
            ],
        }
    }

    fn letter_weight(letter: Letter, params: &WalkParams) -> Complex64 {
        match letter {
            Letter::R | Letter::L => Complex64::new(params.n(), 0.0),
            Letter::F => Complex64::new(0.0, params.m()),
        }
    }

    /// Applies the free step on both slots.
    pub fn apply_w2(&self, v: &[Complex64], params: &WalkParams) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim());
        let mut out = self.zeros();
        for (idx, &a) in v.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let (m1, m2) = self.modes(idx);
            for (t1, l1) in self.targets(m1) {
                let w1 = Self::letter_weight(l1, params) * a;
                for (t2, l2) in self.targets(m2) {
                    out[self.index(t1, t2)] += Self::letter_weight(l2, params) * w1;
                }
            }
        }
        out
    }

    /// Applies the diagonal pair phase.
    pub fn apply_j(&self, v: &[Complex64], params: &WalkParams) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim());
        let phase = params.interaction_phase();
        v.iter()
            .enumerate()
            .map(|(idx, &a)| if self.interacting_cell(idx) { phase * a } else { a })
            .collect()
    }

    /// Applies the phase minus the identity: the diagonal insertion whose
    /// powers organize the coupling expansion.
    pub fn apply_j_minus_one(&self, v: &[Complex64], params: &WalkParams) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim());
        let factor = params.interaction_phase() - Complex64::new(1.0, 0.0);
        v.iter()
            .enumerate()
            .map(|(idx, &a)| {
                if self.interacting_cell(idx) {
                    factor * a
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect()
    }

    /// One step of the pair dynamics: phase first, then the double free
    /// step. With `interacting` false the phase is skipped.
    pub fn step(&self, v: &[Complex64], params: &WalkParams, interacting: bool) -> Vec<Complex64> {
        if interacting {
            self.apply_w2(&self.apply_j(v, params), params)
        } else {
            self.apply_w2(v, params)
        }
    }

    /// Swaps the two slots.
    pub fn apply_exchange(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim());
        let mut out = self.zeros();
        for (idx, &a) in v.iter().enumerate() {
            let (m1, m2) = self.modes(idx);
            out[self.index(m2, m1)] = a;
        }
        out
    }

    pub fn zeros_graded(&self) -> Vec<GradedAmplitude> {
        vec![GradedAmplitude::default(); self.dim()]
    }

    /// Graded twin of [`PairSpace::apply_w2`].
    pub fn apply_w2_graded(&self, v: &[GradedAmplitude]) -> Vec<GradedAmplitude> {
        assert_eq!(v.len(), self.dim());
        let mut out = self.zeros_graded();
        for (idx, a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let (m1, m2) = self.modes(idx);
            for (t1, l1) in self.targets(m1) {
                for (t2, l2) in self.targets(m2) {
                    let mut branch = a.clone();
                    branch.mul_letter(l1);
                    branch.mul_letter(l2);
                    out[self.index(t1, t2)]
                        .add_assign(&branch)
                        .expect("pair branches carry matching letter counts");
                }
            }
        }
        out
    }

    /// Graded twin of [`PairSpace::apply_j`].
    pub fn apply_j_graded(&self, v: &[GradedAmplitude]) -> Vec<GradedAmplitude> {
        assert_eq!(v.len(), self.dim());
        v.iter()
            .enumerate()
            .map(|(idx, a)| {
                let mut out = a.clone();
                if self.interacting_cell(idx) {
                    out.mul_interaction(1);
                }
                out
            })
            .collect()
    }

    /// Graded twin of [`PairSpace::step`].
    pub fn step_graded(&self, v: &[GradedAmplitude], interacting: bool) -> Vec<GradedAmplitude> {
        if interacting {
            self.apply_w2_graded(&self.apply_j_graded(v))
        } else {
            self.apply_w2_graded(v)
        }
    }
}

/// Boundary data of a two-walker matrix element on the line: slot 1 runs
/// from `(x_in, a1)` to `(x_out, b1)`, slot 2 from `(y_in, a2)` to
/// `(y_out, b2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairBoundary {
    pub x_in: i64,
    pub a1: Bit,
    pub y_in: i64,
    pub a2: Bit,
    pub x_out: i64,
    pub b1: Bit,
    pub y_out: i64,
    pub b2: Bit,
}

impl PairBoundary {
    fn in_modes(&self) -> (i64, Bit, i64, Bit) {
        (self.x_in, self.a1, self.y_in, self.a2)
    }
}

/// Fully evolved graded pair state from a basis input on an automatically
/// sized ring the walkers cannot wrap. Returns the space, the line
/// coordinate of ring site 0, and the state vector.
pub fn pair_evolution_graded(
    t: u64,
    x_in: i64,
    a1: Bit,
    y_in: i64,
    a2: Bit,
) -> Result<(PairSpace, i64, Vec<GradedAmplitude>)> {
    let lo = x_in.min(y_in) - t as i64 - 1;
    let hi = x_in.max(y_in) + t as i64 + 1;
    let ring = (hi - lo + 1) as u64;
    let space = PairSpace::new(ring)?;
    let m_in = (
        Mode::new(x_in - lo, crate::algebra::Chirality::from_bit(a1)),
        Mode::new(y_in - lo, crate::algebra::Chirality::from_bit(a2)),
    );
    let mut v = space.zeros_graded();
    v[space.index(m_in.0, m_in.1)] = GradedAmplitude::one();
    for _ in 0..t {
        v = space.step_graded(&v, true);
    }
    Ok((space, lo, v))
}

/// Exact graded matrix element of `t` interacting steps between line
/// positions.
pub fn pair_propagator_graded(t: u64, boundary: &PairBoundary) -> Result<GradedAmplitude> {
    let (x_in, a1, y_in, a2) = boundary.in_modes();
    let (space, lo, v) = pair_evolution_graded(t, x_in, a1, y_in, a2)?;
    let hi = lo + space.ring() as i64 - 1;
    let reachable = |x: i64| x >= lo && x <= hi;
    if !reachable(boundary.x_out) || !reachable(boundary.y_out) {
        return Ok(GradedAmplitude::zero(2 * t));
    }
    let m_out = (
        Mode::new(boundary.x_out - lo, crate::algebra::Chirality::from_bit(boundary.b1)),
        Mode::new(boundary.y_out - lo, crate::algebra::Chirality::from_bit(boundary.b2)),
    );
    Ok(v[space.index(m_out.0, m_out.1)].clone())
}
